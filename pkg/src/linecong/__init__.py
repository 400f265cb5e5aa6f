"""Affine differential geometry of line congruences.

A congruence is a two-parameter family of lines ``[a(u, v), b(u, v)]`` in
affine 3-space.  The package computes its pointwise invariants (focal points
and planes, middle point, torsal directions), the surfaces they sweep, the
parabolic and torsal curves, and the contact types with the standard model
families of lines.
"""
from .congruence import (
    HYPERBOLIC,
    NON_ELLIPTIC,
    Congruence,
    Domain,
    Jet,
    Poly,
    eval_jet,
    fig1_congruence,
    normalize_at_point,
    rechart_at_height,
    taylor_coefficients,
)
from .errors import CongruenceError, ParseError
from .invariants import PointKind, bde_coefficients, classify_point, focal_data, middle_point
from .io import load_congruence, parse_congruence, serialize_congruence
from .linespace import Line, Plane, canonicalize_line, canonicalize_plane, line_incidence, segre_factor

__version__ = "0.1.0"

__all__ = [
    "HYPERBOLIC", "NON_ELLIPTIC", "Congruence", "Domain", "Jet", "Poly", "eval_jet", "fig1_congruence",
    "normalize_at_point", "rechart_at_height", "taylor_coefficients",
    "CongruenceError", "ParseError",
    "PointKind", "bde_coefficients", "classify_point", "focal_data", "middle_point",
    "load_congruence", "parse_congruence", "serialize_congruence",
    "Line", "Plane", "canonicalize_line", "canonicalize_plane", "line_incidence", "segre_factor",
]
