"""Pointwise affine invariants of a congruence at a jet."""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .congruence import Jet
from .errors import DegenerateQuadratic, StallPoint
from .linespace import Plane, canonicalize_plane, segre_factor


class PointKind(str, Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class BDECoefficients:
    """Torsal equation ``A du^2 + B du dv + C dv^2 = 0``."""

    A: object
    B: object
    C: object

    @property
    def delta(self):
        return self.B * self.B - 4 * self.A * self.C

    def evaluate(self, du, dv):
        return self.A * du * du + self.B * du * dv + self.C * dv * dv

    def as_tuple(self):
        return (self.A, self.B, self.C)


@dataclass(frozen=True)
class PointClassification:
    kind: PointKind
    stall: bool
    delta: float


def _first_order(j: Jet):
    g = j.__getitem__
    return (g("a1u"), g("a1v"), g("a2u"), g("a2v")), (g("b1u"), g("b1v"), g("b2u"), g("b2v"))


def bde_from_first_order(a, b) -> BDECoefficients:
    """BDE coefficients from the entries of the two 2x2 Jacobians.

    ``a = (a1u, a1v, a2u, a2v)``, ``b = (b1u, b1v, b2u, b2v)``; entries may be
    numbers or series.
    """
    a1u, a1v, a2u, a2v = a
    b1u, b1v, b2u, b2v = b
    A = a1u * b2u - a2u * b1u
    B = a1u * b2v + a1v * b2u - a2u * b1v - a2v * b1u
    C = a1v * b2v - a2v * b1v
    return BDECoefficients(A, B, C)


def bde_coefficients(j: Jet) -> BDECoefficients:
    return bde_from_first_order(*_first_order(j))


def discriminant(j: Jet):
    return bde_coefficients(j).delta


def parabolic_tolerance(bde: BDECoefficients) -> float:
    return 1e-10 * (1 + float(bde.B) ** 2 + abs(float(bde.A) * float(bde.C)))


def stall_value(j: Jet):
    (a1u, a1v, a2u, a2v), _ = _first_order(j)
    return a1u * a2v - a1v * a2u


def is_stall(j: Jet, tol: float = 1e-12) -> bool:
    (a1u, a1v, a2u, a2v), _ = _first_order(j)
    scale = max(1.0, float(max(abs(a1u), abs(a1v), abs(a2u), abs(a2v)))) ** 2
    return abs(float(stall_value(j))) <= tol * scale


def kind_of(delta, tol) -> PointKind:
    if delta > tol:
        return PointKind.HYPERBOLIC
    if delta < -tol:
        return PointKind.ELLIPTIC
    return PointKind.PARABOLIC


def classify_point(j: Jet) -> PointClassification:
    bde = bde_coefficients(j)
    delta = bde.delta
    return PointClassification(kind_of(delta, parabolic_tolerance(bde)), is_stall(j), delta)


# -- focal data ----------------------------------------------------------------------

@dataclass(frozen=True)
class FocalEntry:
    """One real focal root with its paired point, plane and torsal direction.

    ``t`` is ``inf`` (and ``point`` is None) for a focal point at infinity.
    """

    t: float
    point: np.ndarray | None
    plane: Plane | None
    direction: np.ndarray | None
    multiplicity: int = 1

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.t)


@dataclass(frozen=True)
class FocalData:
    quadratic: tuple
    roots: tuple
    entries: tuple
    kind: PointKind
    mid_parameter: float | None
    middle_point: np.ndarray | None
    plane_quadratic: tuple
    delta: float = 0.0

    @property
    def real_roots(self) -> list[float]:
        return [e.t for e in self.entries for _ in range(e.multiplicity)]

    def entry_for(self, t: float) -> FocalEntry:
        return min(self.entries, key=lambda e: abs(e.t - t))


def focal_quadratic(j: Jet) -> tuple:
    """(q2, q1, q0) with focal parameters the roots of ``q2 t^2 + q1 t + q0``."""
    (a1u, a1v, a2u, a2v), (b1u, b1v, b2u, b2v) = _first_order(j)
    q2 = a1u * a2v - a1v * a2u
    q1 = a1u * b2v + b1u * a2v - a1v * b2u - b1v * a2u
    q0 = b1u * b2v - b1v * b2u
    return q2, q1, q0


def plane_quadratic(j: Jet) -> tuple:
    """(p11, p12, p22): ``p11 c1^2 + p12 c1 c2 + p22 c2^2 = 0`` for focal planes."""
    (a1u, a1v, a2u, a2v), (b1u, b1v, b2u, b2v) = _first_order(j)
    return (
        a1u * b1v - a1v * b1u,
        a1u * b2v + a2u * b1v - a1v * b2u - a2v * b1u,
        a2u * b2v - a2v * b2u,
    )


def _stable_roots(q2: float, q1: float, q0: float, disc: float) -> tuple[float, float]:
    sq = math.sqrt(disc)
    s = -0.5 * (q1 + math.copysign(sq, q1))
    if s == 0:
        return (0.0, 0.0)
    r = sorted([s / q2, q0 / s])
    return r[0], r[1]


def kernel_direction(M: np.ndarray, tol: float = 1e-13) -> np.ndarray | None:
    """Unit kernel vector of a singular 2x2 matrix (first nonzero entry positive)."""
    r = M[0] if np.linalg.norm(M[0]) >= np.linalg.norm(M[1]) else M[1]
    n = np.linalg.norm(r)
    if n <= tol:
        return None
    k = np.array([r[1], -r[0]]) / n
    return normalize_direction(k)


def normalize_direction(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    d = d / np.abs(d).max()  # pre-scale so tiny entries do not underflow in the norm
    d = d / np.linalg.norm(d)
    if d[0] < 0 or (d[0] == 0 and d[1] < 0):
        d = -d
    return d + 0.0


def plane_from_covector(j: Jet, c1: float, c2: float) -> Plane:
    a1, a2, _ = (float(x) for x in j.a)
    b1, b2, _ = (float(x) for x in j.b)
    return canonicalize_plane([c1, c2, -(c1 * a1 + c2 * a2)], c1 * b1 + c2 * b2)


def _entry(j: Jet, Af: np.ndarray, Bf: np.ndarray, t: float, multiplicity: int) -> FocalEntry:
    a = np.array([float(x) for x in j.a])
    b = np.array([float(x) for x in j.b])
    if math.isinf(t):
        d = kernel_direction(Af)
        point = None
    else:
        d = kernel_direction(Bf + t * Af)
        point = b + t * a + 0.0
    plane = None
    if d is not None:
        w = np.concatenate([Af @ d, Bf @ d])
        if np.linalg.norm(w) > 0:
            s = segre_factor(w, tol=1e-6, point_tol=1e-12)
            c1, c2 = s.plane_covector
            plane = plane_from_covector(j, c1, c2)
    return FocalEntry(t, point, plane, d, multiplicity)


def focal_data(j: Jet) -> FocalData:
    q2, q1, q0 = focal_quadratic(j)
    bde = bde_coefficients(j)
    delta = bde.delta
    kind = kind_of(delta, parabolic_tolerance(bde))
    q2f, q1f, q0f = float(q2), float(q1), float(q0)
    scale = abs(q2f) + abs(q1f) + abs(q0f)
    if scale == 0:
        raise DegenerateQuadratic("every point of the line is focal")
    (a1u, a1v, a2u, a2v), (b1u, b1v, b2u, b2v) = _first_order(j)
    Af = np.array([[a1u, a1v], [a2u, a2v]], dtype=float)
    Bf = np.array([[b1u, b1v], [b2u, b2v]], dtype=float)
    a = np.array([float(x) for x in j.a])
    b = np.array([float(x) for x in j.b])
    stall = abs(q2f) <= 1e-12 * max(1.0, float(np.abs(Af).max()) ** 2)
    entries: list[FocalEntry] = []
    mid = None
    if stall:
        # one focal point has escaped to infinity
        if q1f == 0:
            raise DegenerateQuadratic("focal quadratic has no finite roots")
        t = -q0f / q1f
        roots = (complex(t), complex(math.inf))
        entries = [_entry(j, Af, Bf, t, 1), _entry(j, Af, Bf, math.inf, 1)]
    elif kind is PointKind.PARABOLIC:
        t = -q1f / (2 * q2f)
        roots = (complex(t), complex(t))
        entries = [_entry(j, Af, Bf, t, 2)]
        mid = t
    elif kind is PointKind.HYPERBOLIC:
        # the BDE discriminant equals q1^2 - 4 q2 q0 identically
        t1, t2 = _stable_roots(q2f, q1f, q0f, float(delta))
        roots = (complex(t1), complex(t2))
        entries = [_entry(j, Af, Bf, t1, 1), _entry(j, Af, Bf, t2, 1)]
        mid = -q1f / (2 * q2f)
    else:
        re = -q1f / (2 * q2f)
        im = math.sqrt(-float(delta)) / (2 * abs(q2f))
        roots = (complex(re, -im), complex(re, im))
        mid = re
    midpoint = None if mid is None else b + mid * a
    return FocalData(
        (q2, q1, q0), roots, tuple(entries), kind, mid, midpoint, plane_quadratic(j), delta
    )


def middle_parameter(j: Jet):
    q2, q1, _ = focal_quadratic(j)
    if q2 == 0 or abs(float(q2)) <= 1e-14 * (1 + abs(float(q1))):
        raise StallPoint("middle point undefined at a stall point")
    if _exact(q1) and _exact(q2):
        return Fraction(-q1, 2 * q2)
    return -q1 / (2 * q2)


def middle_point(j: Jet) -> np.ndarray:
    m = middle_parameter(j)
    a = j.a
    b = j.b
    exact = _exact(m) and all(_exact(x) for x in (*a, *b))
    return np.array([b[i] + m * a[i] for i in range(3)], dtype=object if exact else float)


def _exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def complex_roots(q2, q1, q0) -> tuple[complex, complex]:
    """Both roots of ``q2 t^2 + q1 t + q0`` as complex numbers (q2 != 0)."""
    q2, q1, q0 = float(q2), float(q1), float(q0)
    d = cmath.sqrt(q1 * q1 - 4 * q2 * q0)
    return (-q1 - d) / (2 * q2), (-q1 + d) / (2 * q2)
