"""The torsal binary differential equation and its integral curves."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .congruence import Congruence, Jet, eval_jet
from .errors import CongruenceError, EllipticSeed, StepFailure
from .invariants import (
    BDECoefficients,
    PointKind,
    bde_coefficients,
    bde_from_first_order,
    kind_of,
    normalize_direction,
    parabolic_tolerance,
)
from .series import constant_of
from .surfaces import Mesh, PlanarCurve, _assemble, _first_order_series


@dataclass(frozen=True)
class DirectionBranch:
    direction: np.ndarray
    branch: int
    valid: bool = True
    double: bool = False


def branches_from_bde(bde: BDECoefficients) -> list[DirectionBranch]:
    """Real roots of ``A du^2 + B du dv + C dv^2`` as unit directions.

    Roots are ordered by ascending ``du/dv`` when ``|A| >= |C|`` and by
    ascending ``dv/du`` otherwise.
    """
    A, B, C = (float(x) for x in bde.as_tuple())
    if A == 0 and B == 0 and C == 0:
        return []
    kind = kind_of(B * B - 4 * A * C, parabolic_tolerance(bde))
    if kind is PointKind.ELLIPTIC:
        return []
    solve_du = abs(A) >= abs(C)
    p2, p0 = (A, C) if solve_du else (C, A)

    def direction(num, den):
        # root num/den of p2 x^2 + B x + p0 in homogeneous form
        return normalize_direction((num, den) if solve_du else (den, num))

    if kind is PointKind.PARABOLIC:
        w = (-B, 2 * p2) if p2 != 0 else (1.0, 0.0)
        return [DirectionBranch(direction(*w), 0, True, True)]
    sq = math.sqrt(B * B - 4 * A * C)
    q = -0.5 * (B + math.copysign(sq, B))
    # q != 0 here; p2 == 0 forces p0 == 0 and leaves the roots 0 and infinity
    roots = [(q, p2), (p0, q)]
    roots.sort(key=lambda r: r[0] / r[1] if r[1] != 0 else math.inf)
    return [DirectionBranch(direction(*r), n) for n, r in enumerate(roots)]


def torsal_branches(j: Jet) -> list[DirectionBranch]:
    return branches_from_bde(bde_coefficients(j))


# -- integration -------------------------------------------------------------------------

class StopReason(str, Enum):
    DOMAIN_BOUNDARY = "domain_boundary"
    PARABOLIC_CURVE = "parabolic_curve"
    STEP_FAILURE = "step_failure"
    MAX_STEPS = "max_steps"


@dataclass
class TorsalCurve:
    points: np.ndarray
    directions: np.ndarray
    branch: int
    reason: StopReason

    def __len__(self) -> int:
        return len(self.points)

    def hermite_midpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Midpoints and unit tangents of the cubic Hermite segments."""
        p, d = self.points, self.directions
        h = np.linalg.norm(p[1:] - p[:-1], axis=1)[:, None]
        mid = 0.5 * (p[1:] + p[:-1]) + h / 8 * (d[:-1] - d[1:])
        tan = 1.5 * (p[1:] - p[:-1]) - h / 4 * (d[:-1] + d[1:])
        n = np.linalg.norm(tan, axis=1)[:, None]
        return mid, tan / np.where(n == 0, 1, n)


@dataclass
class IntegrationParams:
    h0: float = 0.01
    hmin: float = 1e-10
    hmax: float = 0.05
    tol: float = 1e-10
    residual_tol: float = 1e-7
    stop_delta: float = 1e-9
    max_steps: int = 20000
    max_length: float | None = None


class _Outside(Exception):
    pass


class _NoField(Exception):
    pass


def _bde_at(Z: Congruence, z) -> BDECoefficients:
    return bde_coefficients(eval_jet(Z, z[0], z[1], 1))


def _field(Z: Congruence, z, prev: np.ndarray) -> np.ndarray:
    if Z.domain is not None and not Z.domain.contains(z[0], z[1], slack=0):
        raise _Outside()
    try:
        br = branches_from_bde(_bde_at(Z, z))
    except CongruenceError as exc:
        raise _NoField() from exc
    if not br:
        raise _NoField()
    d = max((b.direction for b in br), key=lambda x: abs(float(x @ prev)))
    return d if float(d @ prev) >= 0 else -d


def direction_residual(Z: Congruence, z, d) -> float:
    """Torsal equation evaluated on a unit direction at ``z``."""
    d = np.asarray(d, dtype=float)
    d = d / np.linalg.norm(d)
    return float(_bde_at(Z, z).evaluate(d[0], d[1]))


def developability_residual(Z: Congruence, z, d) -> float:
    """``det(a, a', b')`` along the unit direction ``d`` at ``z``."""
    j = eval_jet(Z, z[0], z[1], 1)
    d = np.asarray(d, dtype=float) / np.linalg.norm(d)
    a = np.array([float(x) for x in j.a])
    ad = np.array([float(j["a1u"]) * d[0] + float(j["a1v"]) * d[1], float(j["a2u"]) * d[0] + float(j["a2v"]) * d[1], 0.0])
    bd = np.array([float(j["b1u"]) * d[0] + float(j["b1v"]) * d[1], float(j["b2u"]) * d[0] + float(j["b2v"]) * d[1], 0.0])
    return float(np.linalg.det(np.array([a, ad, bd])))


def _near_boundary(domain, z, rel: float = 1e-6) -> bool:
    du = rel * (domain.umax - domain.umin)
    dv = rel * (domain.vmax - domain.vmin)
    return (
        min(z[0] - domain.umin, domain.umax - z[0]) <= du
        or min(z[1] - domain.vmin, domain.vmax - z[1]) <= dv
    )


def _rk4(Z, z, d, h):
    k1 = _field(Z, z, d)
    k2 = _field(Z, z + 0.5 * h * k1, k1)
    k3 = _field(Z, z + 0.5 * h * k2, k2)
    k4 = _field(Z, z + h * k3, k3)
    return z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), k1


def integrate_torsal_curve(
    Z: Congruence,
    seed,
    branch: int = 0,
    params: IntegrationParams | None = None,
    reverse: bool = False,
) -> TorsalCurve:
    """Integral curve of one torsal direction field through ``seed``.

    The field is two-valued; each evaluation picks the root closest to the
    previous direction, which lifts the curve to the double cover.
    """
    P = params or IntegrationParams()
    z = np.array(seed, dtype=float)
    bde = _bde_at(Z, z)
    br = branches_from_bde(bde)
    if not br:
        raise EllipticSeed(f"no real torsal direction at {tuple(z)}")
    d = br[branch % len(br)].direction.copy()
    if reverse:
        d = -d
    pts, dirs = [z.copy()], [d.copy()]
    h = P.h0
    length = 0.0
    reason = StopReason.MAX_STEPS
    last_fail = None
    for step in range(P.max_steps):
        if step > 0:
            b = _bde_at(Z, z)
            if abs(float(b.delta)) < P.stop_delta * (1 + float(b.B) ** 2 + abs(float(b.A * b.C))):
                reason = StopReason.PARABOLIC_CURVE
                break
        if P.max_length is not None and length >= P.max_length:
            reason = StopReason.MAX_STEPS
            break
        accepted = False
        while h >= P.hmin:
            try:
                full, _ = _rk4(Z, z, d, h)
                half, _ = _rk4(Z, z, d, 0.5 * h)
                dh = _field(Z, half, d)
                two, _ = _rk4(Z, half, dh, 0.5 * h)
                dn = _field(Z, two, dh)
            except _Outside:
                last_fail = StopReason.DOMAIN_BOUNDARY
                h *= 0.5
                continue
            except _NoField:
                last_fail = StopReason.PARABOLIC_CURVE
                h *= 0.5
                continue
            err = float(np.linalg.norm(two - full))
            if err > P.tol:
                last_fail = StopReason.STEP_FAILURE
                h *= max(0.2, 0.9 * (P.tol / err) ** 0.2)
                continue
            seg = float(np.linalg.norm(two - z))
            mid = 0.5 * (z + two) + seg / 8 * (d - dn)
            tan = 1.5 * (two - z) - seg / 4 * (d + dn)
            try:
                res = abs(developability_residual(Z, mid, tan))
            except CongruenceError:
                res = math.inf
            if res > P.residual_tol:
                last_fail = StopReason.STEP_FAILURE
                h *= 0.5
                continue
            accepted = True
            break
        if not accepted:
            reason = last_fail or StopReason.STEP_FAILURE
            if Z.domain is not None and _near_boundary(Z.domain, z):
                reason = StopReason.DOMAIN_BOUNDARY
            if reason is StopReason.STEP_FAILURE and len(pts) == 1:
                raise StepFailure(f"could not take a first step from {tuple(seed)}")
            break
        length += float(np.linalg.norm(two - z))
        z, d = two, dn
        pts.append(z.copy())
        dirs.append(d.copy())
        grow = 2.0 if err == 0 else min(2.0, 0.9 * (P.tol / err) ** 0.2)
        h = min(P.hmax, h * max(1.0, grow))
    return TorsalCurve(np.array(pts), np.array(dirs), branch, reason)


def build_developable(Z: Congruence, curve: TorsalCurve, t_range=(-1.0, 1.0), nt: int = 11) -> Mesh:
    """Ruled surface swept by the lines over a torsal curve."""
    ts = np.linspace(t_range[0], t_range[1], nt)
    values, extra = {}, {}
    for i, (u, v) in enumerate(curve.points):
        a1, a2, b1, b2 = (float(x) for x in Z.components(u, v))
        for k, t in enumerate(ts):
            values[(i, k)] = np.array([b1 + t * a1, b2 + t * a2, float(Z.height) + t])
            extra[(i, k)] = t
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(curve.points, axis=0), axis=1))])
    return _assemble(len(curve.points), nt, s, ts, values, extra)


# -- folded singularities ---------------------------------------------------------------

@dataclass(frozen=True)
class FoldedSingularity:
    point: np.ndarray
    isolated: bool
    tangency: float
    branch: int = 0


def _double_direction(bde: BDECoefficients) -> tuple:
    A, B, C = bde.A, bde.B, bde.C
    w1 = (-B, 2 * A)
    w2 = (2 * C, -B)
    n1 = float(constant_of(w1[0])) ** 2 + float(constant_of(w1[1])) ** 2
    n2 = float(constant_of(w2[0])) ** 2 + float(constant_of(w2[1])) ** 2
    return w1 if n1 >= n2 else w2


def tangency_function(Z: Congruence, u, v):
    """(psi, grad psi, delta, grad delta, relative psi) at a point.

    ``psi`` is the double direction paired with the discriminant gradient; it
    vanishes where the double direction is tangent to the parabolic curve.
    """
    _, a, b = _first_order_series(Z, u, v, 3)
    bde = bde_from_first_order(a, b)
    delta = bde.delta
    gx, gy = delta.diff(0), delta.diff(1)
    w = _double_direction(BDECoefficients(*(x.truncate(1) for x in bde.as_tuple())))
    psi = w[0] * gx + w[1] * gy
    wv = np.array([float(w[0].value), float(w[1].value)])
    gv = np.array([float(gx.value), float(gy.value)])
    norm = float(np.linalg.norm(wv) * np.linalg.norm(gv))
    rel = float(psi.value) / norm if norm > 0 else 0.0
    grad_psi = np.array([float(psi.deriv((1, 0))), float(psi.deriv((0, 1)))])
    return float(psi.value), grad_psi, float(delta.value), gv, rel


def _oriented_tangency(Z: Congruence, pts) -> np.ndarray:
    """Relative tangency along a polyline with the double direction oriented continuously.

    The double direction is a line field, and the representative picked at each point may
    flip sign between neighbours.  Flipping it so consecutive representatives agree keeps
    the sign changes of the tangency genuine.
    """
    rels, prev = [], None
    sign = 1.0
    for p in pts:
        _, a, b = _first_order_series(Z, p[0], p[1], 1)
        w = _double_direction(BDECoefficients(*(constant_of(x) for x in bde_from_first_order(a, b).as_tuple())))
        w = np.array([float(w[0]), float(w[1])])
        if prev is not None and float(w @ prev) < 0:
            sign = -sign
        prev = w
        rels.append(sign * tangency_function(Z, *p)[4])
    return np.array(rels)


def _refine_fold(Z: Congruence, z0: np.ndarray, max_iter: int = 40):
    z = z0.copy()
    for _ in range(max_iter):
        psi, gpsi, dlt, gd, rel = tangency_function(Z, *z)
        J = np.vstack([gd, gpsi])
        if abs(np.linalg.det(J)) < 1e-300:
            return None
        dz = np.linalg.solve(J, -np.array([dlt, psi]))
        z = z + dz
        if np.linalg.norm(dz) < 1e-15 * (1 + np.linalg.norm(z)):
            break
    psi, _, dlt, _, rel = tangency_function(Z, *z)
    return z, rel


def find_folded_singularities(Z: Congruence, curves, zero_tol: float = 1e-8, tol: float = 1e-10) -> list[FoldedSingularity]:
    """Points of traced parabolic curves where the double direction is tangent to the curve.

    Isolated zeros are bracketed by sign changes of the tangency function
    along each polyline and refined by Newton on (delta, tangency).  Runs of
    vertices where the tangency vanishes identically are reported vertex by
    vertex with ``isolated=False``.
    """
    if isinstance(curves, PlanarCurve):
        curves = [curves]
    found: list[FoldedSingularity] = []
    for curve in curves:
        pts = curve.points
        rels = _oriented_tangency(Z, pts)
        flat = np.abs(rels) < zero_tol
        for n, p in enumerate(pts):
            if flat[n] and ((n > 0 and flat[n - 1]) or (n + 1 < len(pts) and flat[n + 1])):
                found.append(FoldedSingularity(p.copy(), False, float(rels[n]), curve.branch))
        m = len(pts)
        # a closed curve also has the segment from the last vertex back to the first
        for n in range(m if curve.closed and m > 2 else m - 1):
            k = (n + 1) % m
            if flat[n] or flat[k]:
                if flat[n] and not (flat[n - 1] if (n > 0 or curve.closed) else False) and not flat[k]:
                    cand = pts[n]
                else:
                    continue
            elif np.sign(rels[n]) != np.sign(rels[k]):
                s = rels[n] / (rels[n] - rels[k])
                cand = pts[n] + s * (pts[k] - pts[n])
            else:
                continue
            out = _refine_fold(Z, np.asarray(cand, dtype=float))
            if out is None:
                continue
            z, rel = out
            seg = np.linalg.norm(pts[k] - pts[n])
            if abs(rel) <= tol and np.linalg.norm(z - cand) <= 2 * seg + 1e-9:
                if not any(np.linalg.norm(z - f.point) < 1e-9 for f in found):
                    found.append(FoldedSingularity(z, True, rel, curve.branch))
    return found
