"""Congruence text files.

Line-oriented, ``#`` starts a comment::

    chart b
    domain -1 1 -1 1
    b1 0 1 2
    b1 2 0 1/3

A term line ``<component> <du> <dv> <coeff>`` adds ``coeff * u^du * v^dv``.
Integer and ``p/q`` coefficients stay exact; decimals become floats.
"""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .congruence import Congruence, Poly
from .errors import DomainEmpty, MissingChart, ParseError

CHART_COMPONENTS = {"b": ("b1", "b2"), "a": ("a1", "a2")}


def parse_coefficient(text: str, line: int | None = None):
    try:
        if "/" in text:
            p, q = text.split("/")
            return Fraction(int(p), int(q))
        if any(ch in text for ch in ".eEn"):
            return float(text)
        return int(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad coefficient {text!r}", line) from exc


def _int(text: str, line: int) -> int:
    try:
        n = int(text)
    except ValueError as exc:
        raise ParseError(f"bad exponent {text!r}", line) from exc
    if n < 0:
        raise ParseError(f"negative exponent {n}", line)
    return n


def parse_congruence(text: str, name: str | None = None) -> Congruence:
    chart = None
    domain = None
    terms: dict[str, dict] = {}
    pending = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key == "chart":
            if len(rest) != 1 or rest[0] not in CHART_COMPONENTS:
                raise ParseError("expected 'chart b' or 'chart a'", no)
            if chart is not None:
                raise ParseError("chart given twice", no)
            chart = rest[0]
        elif key == "domain":
            if len(rest) != 4:
                raise ParseError("expected 'domain umin umax vmin vmax'", no)
            try:
                umin, umax, vmin, vmax = (float(x) for x in rest)
            except ValueError as exc:
                raise ParseError("bad domain bound", no) from exc
            if not (umin < umax and vmin < vmax):
                raise DomainEmpty("domain is empty", no)
            if domain is not None:
                raise ParseError("domain given twice", no)
            domain = (umin, umax, vmin, vmax)
        elif key in ("a1", "a2", "b1", "b2"):
            if len(rest) != 3:
                raise ParseError(f"expected '{key} du dv coeff'", no)
            pending.append((no, key, _int(rest[0], no), _int(rest[1], no), parse_coefficient(rest[2], no)))
        else:
            raise ParseError(f"unknown key {key!r}", no)
    if chart is None:
        raise MissingChart("missing 'chart' line")
    allowed = CHART_COMPONENTS[chart]
    for no, key, i, j, c in pending:
        if key not in allowed:
            raise ParseError(f"component {key} not allowed in chart {chart}", no)
        comp = terms.setdefault(key, {})
        if (i, j) in comp:
            raise ParseError(f"duplicate term {key} {i} {j}", no)
        comp[(i, j)] = c
    polys = [Poly(terms.get(k, {})) for k in allowed]
    if domain is None:
        domain = (-1.0, 1.0, -1.0, 1.0)
    if chart == "b":
        return Congruence.bchart(*polys, domain=domain, name=name)
    return Congruence.achart(*polys, domain=domain, name=name)


def load_congruence(path) -> Congruence:
    path = Path(path)
    return parse_congruence(path.read_text(encoding="utf-8"), name=path.stem)


def format_coefficient(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    if isinstance(c, int):
        return str(c)
    return repr(float(c))


def serialize_congruence(Z: Congruence) -> str:
    if Z.chart not in CHART_COMPONENTS or not Z.is_polynomial:
        raise ValueError("only polynomial congruences in chart a or b can be written")
    if Z.height != 0:
        raise ValueError("re-based congruences cannot be written")
    out = [f"chart {Z.chart}"]
    if Z.domain is not None:
        out.append("domain " + " ".join(repr(float(x)) for x in Z.domain.as_tuple()))
    for key in CHART_COMPONENTS[Z.chart]:
        poly: Poly = getattr(Z, key)
        for (i, j), c in sorted(poly.terms.items()):
            if c != 0:
                out.append(f"{key} {i} {j} {format_coefficient(c)}")
    return "\n".join(out) + "\n"


def congruence_equal(Z: Congruence, W: Congruence) -> bool:
    if Z.chart != W.chart or Z.height != W.height:
        return False
    dz = Z.domain.as_tuple() if Z.domain else None
    dw = W.domain.as_tuple() if W.domain else None
    return dz == dw and all(getattr(Z, k) == getattr(W, k) for k in ("a1", "a2", "b1", "b2"))

