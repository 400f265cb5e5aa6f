"""Affine model of the space of lines and planes in 3-space.

A line is the class ``[a, b]`` of a direction ``a`` and base point ``b`` under
``(t, s).(a, b) = (s a, b + t a)`` with ``s > 0``.  Near a line whose largest
direction component is on axis ``k`` we use the chart ``a_k = 1, b_k = 0``;
the remaining two components of ``a`` and ``b`` (in increasing axis order) are
the chart coordinates ``(a1, a2, b1, b2)`` used by every tangent-space formula.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    NoRealIntersection,
    NotOnQuadric,
    SingularMatrix,
    TangentLine,
    ZeroDirection,
    ZeroVector,
)

ON_QUADRIC_TOL = 1e-9
SINGULAR_TOL = 1e-12


def _argmax_abs(x: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    return int(np.argmax(np.abs(x)))


@dataclass(frozen=True, eq=False)
class Line:
    """Canonical representative of an oriented line ``b + t a``.

    ``a[axis] = +-1`` (the sign carries the orientation) and ``b[axis] = 0``.
    """

    a: np.ndarray
    b: np.ndarray
    axis: int

    @property
    def chart_axis(self) -> int:
        """1-based index of the chart axis."""
        return self.axis + 1

    @property
    def free_axes(self) -> tuple[int, int]:
        return tuple(i for i in range(3) if i != self.axis)

    def point(self, t: float) -> np.ndarray:
        return self.b + t * self.a

    def chart_coords(self) -> np.ndarray:
        """(a1, a2, b1, b2) in the unoriented chart ``a_axis = 1``."""
        i, j = self.free_axes
        a = self.a / self.a[self.axis]
        return np.array([a[i], a[j], self.b[i], self.b[j]])

    def distance_to(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        d = self.a / np.linalg.norm(self.a)
        r = x - self.b
        return float(np.linalg.norm(r - np.dot(r, d) * d))

    def same_line(self, other: "Line", tol: float = 1e-9, oriented: bool = False) -> bool:
        """Equality of the underlying point sets (and orientation if asked)."""
        if self.axis != other.axis:
            other = canonicalize_line(other.a, other.b, axis=self.axis)
        sa = self.a / self.a[self.axis]
        oa = other.a / other.a[other.axis]
        scale = 1.0 + max(np.abs(self.b).max(), np.abs(other.b).max())
        same = np.allclose(sa, oa, atol=tol, rtol=0) and np.allclose(self.b, other.b, atol=tol * scale, rtol=0)
        if oriented:
            same = same and np.sign(self.a[self.axis]) == np.sign(other.a[other.axis])
        return bool(same)

    def __eq__(self, other):
        if not isinstance(other, Line):
            return NotImplemented
        return self.same_line(other, oriented=True)

    def __hash__(self):
        return hash((self.axis, tuple(np.round(self.a, 12)), tuple(np.round(self.b, 12))))


@dataclass(frozen=True, eq=False)
class Plane:
    """Plane ``c . x = d`` scaled so the largest-magnitude entry of ``c`` is 1."""

    c: np.ndarray
    d: float

    def contains_point(self, x, tol: float = 1e-9) -> bool:
        return abs(float(np.dot(self.c, x)) - self.d) <= tol * (1.0 + np.abs(x).max())

    def contains_line(self, line: Line, tol: float = 1e-9) -> bool:
        return abs(float(np.dot(self.c, line.a))) <= tol and self.contains_point(line.b, tol)

    def isclose(self, other: "Plane", tol: float = 1e-9) -> bool:
        return bool(np.allclose(self.c, other.c, atol=tol, rtol=0) and abs(self.d - other.d) <= tol * (1 + abs(self.d)))

    def __repr__(self) -> str:
        return f"Plane(c={self.c.tolist()}, d={self.d})"


def canonicalize_plane(c: Sequence[float], d: float) -> Plane:
    c = np.asarray(c, dtype=float)
    if not np.any(c):
        raise ZeroVector("plane covector is zero")
    k = _argmax_abs(c)
    s = c[k]
    return Plane(c / s + 0.0, float(d) / s + 0.0)


def canonicalize_line(a: Sequence[float], b: Sequence[float], axis: int | None = None) -> Line:
    """Canonical representative of ``[a, b]``.

    ``axis`` forces the chart (0-based); by default it is the index of the
    largest-magnitude component of ``a``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (3,) or b.shape != (3,):
        raise ValueError("a and b must be 3-vectors")
    if not np.any(a):
        raise ZeroDirection("line direction is zero")
    k = _argmax_abs(a) if axis is None else axis
    if a[k] == 0:
        raise ZeroDirection(f"direction has no component on axis {k + 1}")
    an = a / abs(a[k])
    bn = b - (b[k] / an[k]) * an
    bn[k] = 0.0
    return Line(an + 0.0, bn + 0.0, k)


def line_from_chart(axis: int, coords: Sequence[float]) -> Line:
    """Inverse of :meth:`Line.chart_coords` (positive orientation)."""
    a = np.zeros(3)
    b = np.zeros(3)
    i, j = (x for x in range(3) if x != axis)
    a[axis] = 1.0
    a[i], a[j], b[i], b[j] = coords
    return canonicalize_line(a, b, axis=axis)


def check_invertible(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3):
        raise ValueError("A must be 3x3")
    norm = np.linalg.norm(A, 2)
    if abs(np.linalg.det(A)) <= SINGULAR_TOL * norm**3:
        raise SingularMatrix("affine map has singular linear part")
    return A


def affine_transform_line(A, T, line: Line) -> Line:
    A = check_invertible(A)
    T = np.asarray(T, dtype=float)
    return canonicalize_line(A @ line.a, A @ line.b + T)


def affine_transform_point(A, T, x) -> np.ndarray:
    return np.asarray(A, dtype=float) @ np.asarray(x, dtype=float) + np.asarray(T, dtype=float)


def affine_transform_plane(A, T, plane: Plane) -> Plane:
    """Dual action ``(A, T) * (c, d) = (c A^-1, d + c A^-1 T)``."""
    A = check_invertible(A)
    c_new = np.linalg.solve(A.T, plane.c)
    return canonicalize_plane(c_new, plane.d + float(np.dot(c_new, T)))


class IncidenceKind(Enum):
    SKEW = "skew"
    MEET = "meet"
    PARALLEL = "parallel"
    EQUAL = "equal"


@dataclass(frozen=True)
class Incidence:
    kind: IncidenceKind
    point: np.ndarray | None = None


def line_incidence(L: Line, M: Line, tol: float = 1e-10) -> Incidence:
    da = L.a / np.linalg.norm(L.a)
    db = M.a / np.linalg.norm(M.a)
    r = M.b - L.b
    scale = 1.0 + np.linalg.norm(L.b) + np.linalg.norm(M.b)
    n = np.cross(da, db)
    if np.linalg.norm(n) <= tol:
        off = r - np.dot(r, da) * da
        if np.linalg.norm(off) <= tol * scale:
            return Incidence(IncidenceKind.EQUAL)
        return Incidence(IncidenceKind.PARALLEL)
    if abs(np.dot(r, n)) > tol * scale:
        return Incidence(IncidenceKind.SKEW)
    # b_L + s a_L = b_M + s' a_M in least squares
    sol, *_ = np.linalg.lstsq(np.column_stack([L.a, -M.a]), r, rcond=None)
    x = 0.5 * (L.point(sol[0]) + M.point(sol[1]))
    return Incidence(IncidenceKind.MEET, x)


# -- the tangent-cone quadric -------------------------------------------------

def quadric_evaluate(w: Sequence[float]):
    """``alpha1 beta2 - alpha2 beta1`` for ``w = (alpha1, alpha2, beta1, beta2)``."""
    return w[0] * w[3] - w[1] * w[2]


def quadric_polar(x: Sequence[float], y: Sequence[float]):
    """Symmetric bilinear form with ``quadric_polar(w, w) = 2 Q(w)``."""
    return x[0] * y[3] + y[0] * x[3] - x[1] * y[2] - y[1] * x[2]


def quadric_gradient(w: Sequence[float]) -> np.ndarray:
    return np.array([w[3], -w[2], -w[1], w[0]], dtype=float)


@dataclass(frozen=True)
class SegrePoint:
    """Point of the quadric as (plane ruling, point ruling).

    ``plane_coord`` is scaled so its largest entry is 1; the overall scale of
    the factored vector lives in ``point_coord``.
    """

    plane_coord: tuple
    point_coord: tuple

    @property
    def t(self) -> float:
        b1, b2 = self.point_coord
        if b1 == 0:
            return float("inf")
        return -b2 / b1

    @property
    def at_infinity(self) -> bool:
        return self.point_coord[0] == 0

    @property
    def plane_covector(self) -> tuple:
        """(c1, c2) with ``alpha1 c1 + alpha2 c2 = 0``."""
        a1, a2 = self.plane_coord
        return (-a2, a1)

    def product(self) -> np.ndarray:
        (a1, a2), (b1, b2) = self.plane_coord, self.point_coord
        return np.array([a1 * b1, a2 * b1, a1 * b2, a2 * b2], dtype=float)


def segre_factor(w: Sequence[float], tol: float = ON_QUADRIC_TOL, point_tol: float = 0.0) -> SegrePoint:
    """Split an on-cone tangent vector into its two ruling coordinates.

    ``point_tol`` snaps a relatively tiny ``beta1`` to zero (point at
    infinity); by default only an exact zero does.
    """
    w = np.asarray(w, dtype=float)
    norm2 = float(np.dot(w, w))
    if norm2 == 0.0:
        raise ZeroVector("tangent vector is zero")
    if abs(quadric_evaluate(w)) > tol * norm2:
        raise NotOnQuadric(f"|Q(w)| = {abs(quadric_evaluate(w)):.3e} exceeds tolerance")
    # rows are beta_i * (alpha1, alpha2)
    M = np.array([[w[0], w[1]], [w[2], w[3]]])
    r = int(np.argmax(np.linalg.norm(M, axis=1)))
    alpha = M[r].copy()
    alpha /= alpha[_argmax_abs(alpha)]
    beta = M @ alpha / np.dot(alpha, alpha)
    if point_tol and abs(beta[0]) <= point_tol * np.linalg.norm(beta):
        beta[0] = 0.0
    return SegrePoint((float(alpha[0]), float(alpha[1])), (float(beta[0]), float(beta[1])))


def segre_product(plane_coord, point_coord) -> np.ndarray:
    return SegrePoint(tuple(plane_coord), tuple(point_coord)).product()


@dataclass(frozen=True)
class Generators:
    W: np.ndarray  # 2x4, rows span the point generator
    V: np.ndarray  # 2x4, rows span the plane generator
    point: np.ndarray | None  # None is the point at infinity
    plane: Plane


def generator_planes(line: Line, s: SegrePoint) -> Generators:
    """Both rulings of the quadric through ``s`` plus the point and plane they name."""
    if s.at_infinity:
        W = np.array([[0.0, 0, 1, 0], [0, 0, 0, 1]])
        x = None
    else:
        t = s.t
        W = np.array([[1.0, 0, -t, 0], [0, 1, 0, -t]])
        a_chart = line.a / line.a[line.axis]
        x = line.b + t * a_chart
    c1, c2 = s.plane_covector
    V = np.array([[-c2, c1, 0.0, 0.0], [0.0, 0.0, -c2, c1]])
    i, j = line.free_axes
    a_chart = line.a / line.a[line.axis]
    c = np.zeros(3)
    c[i], c[j] = c1, c2
    c[line.axis] = -(c1 * a_chart[i] + c2 * a_chart[j])
    d = c1 * line.b[i] + c2 * line.b[j]
    return Generators(W, V, x, canonicalize_plane(c, d))


def _binary_quadratic_roots(A: float, B: float, C: float, tol: float):
    """Projective roots (x:y) of ``A x^2 + B x y + C y^2``.

    Returns a list of 2-vectors; a repeated root raises :class:`TangentLine`.
    """
    scale = abs(A) + abs(B) + abs(C)
    if scale == 0:
        raise TangentLine("line lies on the quadric")
    disc = B * B - 4 * A * C
    if disc < -tol * scale * scale:
        raise NoRealIntersection("line misses the quadric")
    if abs(disc) <= tol * scale * scale:
        raise TangentLine("line is tangent to the quadric")
    q = -0.5 * (B + np.copysign(np.sqrt(disc), B))
    # roots q/A and C/q written homogeneously, so A = 0 or C = 0 need no special case
    roots = [np.array([q, A]), np.array([C, q])]
    return [r / np.linalg.norm(r) for r in roots]


def quadric_line_points(p, q, tol: float = 1e-12) -> list[np.ndarray]:
    """The two points where the projective line through ``p, q`` meets the quadric."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    A = quadric_evaluate(p)
    B = quadric_polar(p, q)
    C = quadric_evaluate(q)
    return [x * p + y * q for x, y in _binary_quadratic_roots(A, B, C, tol)]


def dual_tangent_line(line: Line, span: Sequence[Sequence[float]], tol: float = 1e-12) -> np.ndarray:
    """Polar line: meet of the tangent hyperplanes at the two quadric points of ``span``.

    Returns a 2x4 array whose rows span the dual line.
    """
    p, q = (np.asarray(v, dtype=float) for v in span)
    if np.linalg.matrix_rank(np.vstack([p, q])) < 2:
        raise ValueError("span vectors are dependent")
    x1, x2 = quadric_line_points(p, q, tol)
    G = np.vstack([quadric_gradient(x1), quadric_gradient(x2)])
    _, _, vt = np.linalg.svd(G)
    return vt[2:]


def same_projective_span(U, V, tol: float = 1e-9) -> bool:
    """True when the row spans of ``U`` and ``V`` coincide."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    s_u = np.linalg.svd(U, compute_uv=False)
    s_v = np.linalg.svd(V, compute_uv=False)
    k = int(np.sum(s_u > tol * s_u[0]))
    if int(np.sum(s_v > tol * s_v[0])) != k:
        return False
    s_all = np.linalg.svd(np.vstack([U, V]), compute_uv=False)
    return bool(len(s_all) <= k or s_all[k] <= tol * s_all[0])
