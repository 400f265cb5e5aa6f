"""Exponential maps and the surfaces they carry: focal, plane-focal, middle.

Also the parabolic-curve tracer and the singularity tests for the
exponential map (Morin types) and for the middle surface (cross-cap).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .congruence import (
    NON_ELLIPTIC,
    Congruence,
    Domain,
    Jet,
    eval_jet,
    normalize_at_point,
    taylor_table_from_jet,
)
from .errors import (
    CongruenceError,
    DegenerateField,
    NotParabolic,
    SurfaceSingular,
)
from .invariants import (
    PointKind,
    bde_coefficients,
    bde_from_first_order,
    classify_point,
    focal_data,
    parabolic_tolerance,
)
from .series import Series, cross, det3, dot

# -- meshes -------------------------------------------------------------------------


@dataclass
class Mesh:
    """Quad mesh sampled over a (u, v) grid; missing vertices are holes."""

    vertices: np.ndarray
    faces: list
    params: np.ndarray
    tags: list | None = None
    holes: list = field(default_factory=list)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def to_obj(self) -> str:
        lines = [f"v {x + 0.0:.17g} {y + 0.0:.17g} {z + 0.0:.17g}" for x, y, z in self.vertices]
        lines += ["f " + " ".join(str(i + 1) for i in f) for f in self.faces]
        return "\n".join(lines) + "\n"

    def vertex_near(self, u: float, v: float) -> int:
        d = np.hypot(self.params[:, 0] - u, self.params[:, 1] - v)
        return int(np.argmin(d))


def _assemble(nu: int, nv: int, us, vs, values: dict, extra: dict | None = None, tags: dict | None = None) -> Mesh:
    """Mesh from grid values keyed by (i, j); absent keys are holes."""
    index = {}
    verts, params, vtags = [], [], []
    for i in range(nu):
        for j in range(nv):
            if (i, j) in values:
                index[(i, j)] = len(verts)
                verts.append(values[(i, j)])
                row = [us[i], vs[j]]
                if extra is not None:
                    row.append(extra[(i, j)])
                params.append(row)
                if tags is not None:
                    vtags.append(tags.get((i, j)))
    faces = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            quad = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            if all(q in index for q in quad):
                faces.append(tuple(index[q] for q in quad))
    holes = [(i, j) for i in range(nu) for j in range(nv) if (i, j) not in index]
    width = 3 if extra is not None else 2
    return Mesh(
        np.array(verts, dtype=float).reshape(-1, 3),
        faces,
        np.array(params, dtype=float).reshape(-1, width),
        vtags if tags is not None else None,
        holes,
    )


# -- exponential map -----------------------------------------------------------------

def exponential_map(Z: Congruence, u, v, t) -> np.ndarray:
    Z.check_domain(u, v)
    a1, a2, b1, b2 = (float(x) for x in Z.components(u, v))
    return np.array([b1 + t * a1, b2 + t * a2, float(Z.height) + t])


def exp_map_series(Z: Congruence, u, v, t, order: int) -> list[Series]:
    """Taylor expansion of ``(u, v, t) -> b + t a`` at a point."""
    x, y, s = Series.variables((u, v, t), order)
    a1, a2, b1, b2 = Z.components(x, y)
    return [b1 + s * a1, b2 + s * a2, s + Z.height]


def exp_jacobian(Z: Congruence, u, v, t) -> np.ndarray:
    """Derivative of the exponential map (rows: x1, x2, x3; columns: u, v, t)."""
    E = exp_map_series(Z, u, v, t, 1)
    return np.array([[float(e.deriv(k)) for k in ((1, 0, 0), (0, 1, 0), (0, 0, 1))] for e in E])


def focal_function(j: Jet, t):
    """``g(t) = q2 t^2 + q1 t + q0``, equal to det D(exp) at parameter ``t``."""
    from .invariants import focal_quadratic

    q2, q1, q0 = focal_quadratic(j)
    return q2 * t * t + q1 * t + q0


# -- focal surfaces --------------------------------------------------------------------

@dataclass
class FocalSheets:
    sheets: tuple
    plane_sheets: tuple


def _grid(domain_or_grid, resolution=None):
    if isinstance(domain_or_grid, Domain):
        nu, nv = resolution if isinstance(resolution, tuple) else (resolution, resolution)
        return domain_or_grid.grid(nu, nv)
    us, vs = domain_or_grid
    return np.asarray(us, dtype=float), np.asarray(vs, dtype=float)


def _safe_focal(Z, u, v):
    try:
        return focal_data(eval_jet(Z, u, v, 1))
    except CongruenceError:
        return None
    except (ZeroDivisionError, ValueError, FloatingPointError):
        return None


def _track_sheets(nu, nv, roots: dict) -> dict:
    """Assign each pair of real roots to two sheets by nearest-root continuation.

    ``roots[(i, j)]`` is an ascending pair; returns ``{(i, j): (k0, k1)}``
    giving which root index lands on sheet 0 and sheet 1.
    """
    order: dict = {}
    for start in sorted(roots):
        if start in order:
            continue
        order[start] = (0, 1)
        queue = deque([start])
        while queue:
            i, j = queue.popleft()
            ref = roots[(i, j)]
            k0, k1 = order[(i, j)]
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                n = (i + di, j + dj)
                if n in order or n not in roots:
                    continue
                r = roots[n]
                straight = abs(r[0] - ref[k0]) + abs(r[1] - ref[k1])
                swapped = abs(r[1] - ref[k0]) + abs(r[0] - ref[k1])
                order[n] = (0, 1) if straight <= swapped else (1, 0)
                queue.append(n)
    return order


def _plane_chart_coords(plane, axis: int) -> np.ndarray | None:
    c = plane.c
    if abs(c[axis]) < 1e-9 * np.abs(c).max():
        return None
    cn = c / c[axis]
    others = [cn[i] for i in range(3) if i != axis]
    return np.array(others + [plane.d / c[axis]])


def sample_focal_data(Z: Congruence, us, vs):
    """Focal data at every grid node (None where undefined)."""
    return {(i, j): _safe_focal(Z, u, v) for i, u in enumerate(us) for j, v in enumerate(vs)}


def sample_focal_surfaces(Z: Congruence, us, vs, plane_axis: int | None = None) -> FocalSheets:
    """Both sheets of the focal surface and of the plane-focal surface.

    Plane vertices are ``(other two covector entries, offset)`` in the chart
    where covector entry ``plane_axis`` (0-based, among the first two) is 1.
    """
    us, vs = np.asarray(us, dtype=float), np.asarray(vs, dtype=float)
    nu, nv = len(us), len(vs)
    data = sample_focal_data(Z, us, vs)
    entries: dict = {}
    for key, fd in data.items():
        if fd is None or not fd.entries or any(e.at_infinity for e in fd.entries):
            continue
        es = list(fd.entries)
        if len(es) == 1:
            es = es * 2
        entries[key] = es
    roots = {k: (es[0].t, es[1].t) for k, es in entries.items()}
    order = _track_sheets(nu, nv, roots)
    if plane_axis is None:
        # chart chosen once for the whole mesh, from the first available plane
        plane_axis = 1
        for k in sorted(entries):
            p = entries[k][0].plane
            if p is not None:
                plane_axis = int(np.argmax(np.abs(p.c[:2])))
                break
    sheets, plane_sheets = [], []
    for s in (0, 1):
        pts, ts, planes = {}, {}, {}
        for key, es in entries.items():
            e = es[order[key][s]]
            pts[key] = e.point
            ts[key] = e.t
            if e.plane is not None:
                pc = _plane_chart_coords(e.plane, plane_axis)
                if pc is not None:
                    planes[key] = pc
        sheets.append(_assemble(nu, nv, us, vs, pts, ts))
        plane_sheets.append(_assemble(nu, nv, us, vs, planes, {k: ts[k] for k in planes}))
    return FocalSheets(tuple(sheets), tuple(plane_sheets))


def sample_focal_surface(Z: Congruence, us, vs) -> tuple[Mesh, Mesh]:
    return sample_focal_surfaces(Z, us, vs).sheets


def sample_plane_focal_surface(Z: Congruence, us, vs, plane_axis: int | None = None) -> tuple[Mesh, Mesh]:
    return sample_focal_surfaces(Z, us, vs, plane_axis).plane_sheets


def sample_middle_surface(Z: Congruence, us, vs) -> Mesh:
    us, vs = np.asarray(us, dtype=float), np.asarray(vs, dtype=float)
    pts, ms = {}, {}
    for i, u in enumerate(us):
        for j, v in enumerate(vs):
            fd = _safe_focal(Z, u, v)
            if fd is None or fd.middle_point is None:
                continue
            pts[(i, j)] = np.asarray(fd.middle_point, dtype=float)
            ms[(i, j)] = fd.mid_parameter
    return _assemble(len(us), len(vs), us, vs, pts, ms)


def _first_order_series(Z: Congruence, u, v, order: int):
    """Series of (a1, a2, b1, b2), their first partials, and the BDE coefficients."""
    s = Z.local_series(u, v, order)
    names = ("a1", "a2", "b1", "b2")
    du = {n: s[n].diff(0) for n in names}
    dv = {n: s[n].diff(1) for n in names}
    a = (du["a1"], dv["a1"], du["a2"], dv["a2"])
    b = (du["b1"], dv["b1"], du["b2"], dv["b2"])
    return s, a, b


def middle_surface_series(Z: Congruence, u, v, order: int = 2) -> list[Series]:
    """Taylor expansion of the middle surface ``b + m a`` (to ``order``)."""
    s, a, b = _first_order_series(Z, u, v, order + 1)
    a1u, a1v, a2u, a2v = a
    b1u, b1v, b2u, b2v = b
    q2 = a1u * a2v - a1v * a2u
    q1 = a1u * b2v + b1u * a2v - a1v * b2u - b1v * a2u
    if abs(float(q2.value)) < 1e-14:
        raise SurfaceSingular("middle surface undefined at a stall point")
    m = q1 * q2.reciprocal() * (-0.5)
    A1, A2 = s["a1"].truncate(order), s["a2"].truncate(order)
    B1, B2 = s["b1"].truncate(order), s["b2"].truncate(order)
    return [B1 + m * A1, B2 + m * A2, m + Z.height]


def middle_surface_jacobian(Z: Congruence, u, v) -> np.ndarray:
    """3x2 Jacobian of the middle surface at ``(u, v)``."""
    eta = middle_surface_series(Z, u, v, 1)
    return np.array([[float(e.deriv((1, 0))), float(e.deriv((0, 1)))] for e in eta])


# -- parabolic curve --------------------------------------------------------------------

@dataclass
class PlanarCurve:
    points: np.ndarray
    residuals: np.ndarray
    branch: int
    closed: bool = False

    def __len__(self) -> int:
        return len(self.points)


def delta_series(Z: Congruence, u, v, order: int = 2) -> Series:
    """Series of the discriminant at ``(u, v)`` (to ``order``)."""
    _, a, b = _first_order_series(Z, u, v, order + 1)
    return bde_from_first_order(a, b).delta


def delta_value(Z: Congruence, u, v) -> tuple[float, float]:
    """(delta, scale) at a point; ``scale`` is the parabolic tolerance scale."""
    bde = bde_coefficients(eval_jet(Z, u, v, 1))
    return float(bde.delta), parabolic_tolerance(bde) / 1e-10


def _delta_grad(Z: Congruence, u, v) -> tuple[float, np.ndarray]:
    d = delta_series(Z, u, v, 1)
    return float(d.value), np.array([float(d.deriv((1, 0))), float(d.deriv((0, 1)))])


def refine_parabolic_point(Z: Congruence, u, v, tol: float = 1e-12, max_iter: int = 30) -> np.ndarray:
    """Nearest-ish zero of the discriminant by minimum-norm Newton steps."""
    z = np.array([u, v], dtype=float)
    for _ in range(max_iter):
        val, g = _delta_grad(Z, z[0], z[1])
        _, scale = delta_value(Z, z[0], z[1])
        if abs(val) <= tol * scale:
            break
        gg = float(g @ g)
        if gg == 0:
            raise DegenerateField("discriminant has a critical point here")
        z = z - val * g / gg
    return z


def _edge_root(Z, p: np.ndarray, q: np.ndarray, fp: float, fq: float, tol: float) -> np.ndarray:
    """Zero of the discriminant on segment pq by bisection then Newton."""
    lo, hi, flo = 0.0, 1.0, fp
    d = q - p
    s = 0.5
    for _ in range(60):
        s = 0.5 * (lo + hi)
        f, scale = delta_value(Z, *(p + s * d))
        if abs(f) <= 1e-6 * scale or hi - lo < 1e-6:
            break
        if (f >= 0) == (flo >= 0):
            lo, flo = s, f
        else:
            hi = s
    for _ in range(20):
        val, g = _delta_grad(Z, *(p + s * d))
        _, scale = delta_value(Z, *(p + s * d))
        if abs(val) <= tol * scale:
            break
        slope = float(g @ d)
        if slope == 0:
            break
        s_new = s - val / slope
        if not (lo - 1e-9 <= s_new <= hi + 1e-9):
            # fall back to bisection inside the bracket
            f, _ = delta_value(Z, *(p + s * d))
            if (f >= 0) == (flo >= 0):
                lo, flo = s, f
            else:
                hi = s
            s_new = 0.5 * (lo + hi)
        s = min(max(s_new, 0.0), 1.0)
    return p + s * d


def trace_parabolic_curve(Z: Congruence, domain: Domain | None = None, resolution=64, tol: float = 1e-10) -> list[PlanarCurve]:
    """Zero set of the discriminant by marching squares with refined edge roots.

    A grid value of exactly zero counts as positive.  Saddle cells are
    resolved with the value at the cell centre.
    """
    domain = domain or Z.domain
    if domain is None:
        raise ValueError("a domain is required")
    nu, nv = resolution if isinstance(resolution, tuple) else (resolution, resolution)
    us, vs = domain.grid(nu, nv)
    F = np.empty((nu, nv))
    S = np.empty((nu, nv))
    for i, u in enumerate(us):
        for j, v in enumerate(vs):
            F[i, j], S[i, j] = delta_value(Z, u, v)
    pos = F >= 0
    for i in range(nu - 1):
        for j in range(nv - 1):
            corners = F[i:i + 2, j:j + 2]
            if np.all(np.abs(corners) <= 1e-14 * S[i:i + 2, j:j + 2]):
                _, g = _delta_grad(Z, 0.5 * (us[i] + us[i + 1]), 0.5 * (vs[j] + vs[j + 1]))
                if np.linalg.norm(g) <= 1e-12 * S[i, j]:
                    raise DegenerateField("discriminant vanishes on a whole grid cell")
    roots: dict = {}

    def root(key):
        if key not in roots:
            kind, i, j = key
            p = np.array([us[i], vs[j]])
            if kind == "h":
                q, fq = np.array([us[i + 1], vs[j]]), F[i + 1, j]
            else:
                q, fq = np.array([us[i], vs[j + 1]]), F[i, j + 1]
            roots[key] = _edge_root(Z, p, q, F[i, j], fq, tol)
        return key

    adj: dict = {}

    def link(k1, k2):
        adj.setdefault(k1, []).append(k2)
        adj.setdefault(k2, []).append(k1)

    for i in range(nu - 1):
        for j in range(nv - 1):
            c = [pos[i, j], pos[i + 1, j], pos[i + 1, j + 1], pos[i, j + 1]]
            edges = [("h", i, j), ("v", i + 1, j), ("h", i, j + 1), ("v", i, j)]
            cut = [e for n, e in enumerate(edges) if c[n] != c[(n + 1) % 4]]
            if len(cut) == 2:
                link(root(cut[0]), root(cut[1]))
            elif len(cut) == 4:
                fc, _ = delta_value(Z, 0.5 * (us[i] + us[i + 1]), 0.5 * (vs[j] + vs[j + 1]))
                for e in edges:
                    root(e)
                # corners 0 and 2 share a sign; join them through the centre if it agrees
                if (fc >= 0) == c[0]:
                    link(edges[0], edges[1])
                    link(edges[2], edges[3])
                else:
                    link(edges[3], edges[0])
                    link(edges[1], edges[2])
    curves: list[PlanarCurve] = []
    seen: set = set()

    def walk(start):
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [n for n in adj[cur] if n != prev and n not in seen]
            if not nxt:
                closed = len(chain) > 2 and start in adj[cur] and prev is not None
                return chain, closed
            prev, cur = cur, nxt[0]
            seen.add(cur)
            chain.append(cur)

    starts = sorted(k for k, n in adj.items() if len(n) == 1) + sorted(adj)
    for s in starts:
        if s in seen:
            continue
        chain, closed = walk(s)
        pts = []
        for k in chain:
            p = roots[k]
            if not pts or np.linalg.norm(p - pts[-1]) > 1e-12:
                pts.append(p)
        pts = np.array(pts)
        res = np.array([abs(delta_value(Z, *p)[0]) for p in pts])
        curves.append(PlanarCurve(pts, res, len(curves), closed))
    return curves


# -- exponential-map singularities -------------------------------------------------------

class ExpKind(str, Enum):
    REGULAR = "regular"
    FOLD = "fold"
    CUSP = "cusp"
    SWALLOWTAIL = "swallowtail"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ExpSingularity:
    kind: ExpKind
    location: tuple
    g: float
    detail: dict = field(default_factory=dict)


def _grad3(s: Series) -> list:
    return [s.deriv(k) for k in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]


def classify_exponential_singularity(Z: Congruence, u, v, t, order: int = 6, tol: float = 1e-7) -> ExpSingularity:
    """Morin type of ``(u, v, t) -> b + t a`` at a point.

    Uses the kernel field ``k`` (cross product of two rows of the derivative)
    and the iterated derivatives ``phi_{n+1} = k . grad phi_n`` of
    ``phi_1 = det D(exp)``, all as exact truncated series.
    """
    Z.check_domain(u, v)
    E = exp_map_series(Z, u, v, t, order)
    D = [[e.diff(k) for k in range(3)] for e in E]
    phi1 = det3(D)
    Df = np.array([[float(x.value) for x in row] for row in D])
    scale = max(1.0, float(np.abs(Df).max()))
    g = float(phi1.value)
    loc = (u, v, t)
    if abs(g) > 1e-9 * scale**3:
        return ExpSingularity(ExpKind.REGULAR, loc, g)
    sv = np.linalg.svd(Df, compute_uv=False)
    if sv[1] <= 1e-9 * sv[0]:
        return ExpSingularity(ExpKind.DEGENERATE, loc, g, {"corank": 2})
    pairs = [(0, 1), (0, 2), (1, 2)]
    best = max(pairs, key=lambda p: np.linalg.norm(np.cross(Df[p[0]], Df[p[1]])))
    k = cross(D[best[0]], D[best[1]])
    kn = np.linalg.norm([float(x.value) for x in k])
    k = [x * (1.0 / kn) for x in k]
    phis = [phi1]
    grads = [np.array([float(x) for x in _grad3(phi1)])]
    if np.linalg.norm(grads[0]) <= tol * scale**2:
        return ExpSingularity(ExpKind.DEGENERATE, loc, g, {"reason": "critical set singular"})
    kinds = [ExpKind.FOLD, ExpKind.CUSP, ExpKind.SWALLOWTAIL]
    values = []
    for n, kind in enumerate(kinds):
        cur = phis[-1]
        parts = [cur.diff(m) for m in range(3)]
        nxt = dot(parts, [x.truncate(parts[0].order) for x in k])
        val = float(nxt.value)
        values.append(val)
        gscale = 1.0 + float(np.linalg.norm(grads[-1]))
        if abs(val) > tol * gscale:
            # nondegeneracy: gradients of phi_1 .. phi_{n+1} independent
            G = np.array(grads)
            if n > 0 and np.linalg.matrix_rank(G, tol=tol * np.abs(G).max()) < n + 1:
                return ExpSingularity(ExpKind.DEGENERATE, loc, g, {"phi": values})
            return ExpSingularity(kind, loc, g, {"phi": values})
        phis.append(nxt)
        if nxt.order < 1:
            break
        grads.append(np.array([float(x) for x in _grad3(nxt)]))
    return ExpSingularity(ExpKind.DEGENERATE, loc, g, {"phi": values})


# -- middle surface singularities -------------------------------------------------------

class CrossCapVerdict(str, Enum):
    NOT_SINGULAR = "not_singular"
    CROSS_CAP = "cross_cap"
    DEGENERATE = "degenerate_singular"


@dataclass(frozen=True)
class CrossCapReport:
    verdict: CrossCapVerdict
    singular_value: object  # b1uu + b2uv in the normal form
    F1: object | None
    F2: object | None
    identity_normalization: bool

    @property
    def is_cross_cap(self) -> bool:
        return self.verdict is CrossCapVerdict.CROSS_CAP


def cross_cap_factors(table) -> tuple:
    """The two factors whose product decides a cross-cap, from a normalized Taylor table."""
    b = lambda j, k, i: table[(j, k, i)]  # noqa: E731
    F1 = 4 * b(1, 1, 1) * b(1, 3, 1) + 4 * b(1, 1, 1) * b(2, 3, 2) - b(1, 2, 1) ** 2 + 4 * b(2, 2, 2) ** 2
    F2 = (
        3 * b(1, 1, 1) * b(1, 3, 0)
        + 2 * b(1, 1, 1) * b(2, 2, 0)
        + b(1, 1, 1) * b(2, 3, 1)
        - b(1, 2, 0) * b(1, 2, 1)
        - 2 * b(1, 2, 0) * b(2, 2, 2)
    )
    return F1, F2


def _is_zero(x, scale=1.0, tol=1e-9) -> bool:
    return x == 0 or abs(float(x)) <= tol * max(1.0, float(scale))


def cross_cap_test(Z: Congruence, u0, v0) -> CrossCapReport:
    j = eval_jet(Z, u0, v0, 1)
    cls = classify_point(j)
    if cls.kind is not PointKind.PARABOLIC:
        raise NotParabolic(f"point is {cls.kind.value} (delta = {float(cls.delta):.3e})")
    nf = normalize_at_point(Z, u0, v0, NON_ELLIPTIC)
    jet = nf.jet(3)
    s = jet["b1uu"] + jet["b2uv"]
    if not _is_zero(s, abs(jet["b1uu"]) + abs(jet["b2uv"])):
        return CrossCapReport(CrossCapVerdict.NOT_SINGULAR, s, None, None, nf.identity)
    F1, F2 = cross_cap_factors(taylor_table_from_jet(jet))
    verdict = CrossCapVerdict.CROSS_CAP if not (_is_zero(F1) or _is_zero(F2)) else CrossCapVerdict.DEGENERATE
    return CrossCapReport(verdict, s, F1, F2, nf.identity)


# -- parabolic image: tangency and convexity ----------------------------------------------

def _require_parabolic(Z: Congruence, u, v, tol: float) -> Jet:
    j = eval_jet(Z, u, v, 1)
    bde = bde_coefficients(j)
    if abs(float(bde.delta)) > tol * (1 + float(bde.B) ** 2 + abs(float(bde.A * bde.C))):
        raise NotParabolic(f"delta = {float(bde.delta):.3e} at ({u}, {v})")
    return j


def _double_root(j: Jet) -> float:
    from .invariants import focal_quadratic

    q2, q1, _ = focal_quadratic(j)
    return -float(q1) / (2 * float(q2))


def focal_normal(Z: Congruence, u, v, t) -> np.ndarray:
    """Normal of the image plane of D(exp); the focal plane covector."""
    D = exp_jacobian(Z, u, v, t)
    U, sv, _ = np.linalg.svd(D)
    if sv[1] <= 1e-9 * sv[0]:
        raise SurfaceSingular("exponential map has corank 2")
    return U[:, 2]


def middle_normal(Z: Congruence, u, v) -> np.ndarray:
    J = middle_surface_jacobian(Z, u, v)
    n = np.cross(J[:, 0], J[:, 1])
    if np.linalg.norm(n) <= 1e-9 * max(1.0, np.linalg.norm(J)) ** 2:
        raise SurfaceSingular("middle surface is singular here")
    return n / np.linalg.norm(n)


def _angle(n1: np.ndarray, n2: np.ndarray) -> float:
    return float(math.atan2(np.linalg.norm(np.cross(n1, n2)), abs(float(n1 @ n2))))


def middle_focal_tangency(Z: Congruence, u, v, tol: float = 1e-8) -> float:
    """Angle between focal and middle tangent planes over a parabolic point."""
    j = _require_parabolic(Z, u, v, tol)
    t = _double_root(j)
    return _angle(focal_normal(Z, u, v, t), middle_normal(Z, u, v))


class Convexity(str, Enum):
    HYPERBOLIC = "hyperbolic_point"
    OTHER = "other"


@dataclass(frozen=True)
class ConvexityReport:
    verdict: Convexity
    hessian_det: float
    normal: np.ndarray


def _height_hessian(X: Sequence[Series], n: np.ndarray) -> np.ndarray:
    h = dot(X, [float(c) for c in n])
    return np.array([[float(h.deriv((2, 0))), float(h.deriv((1, 1)))],
                     [float(h.deriv((1, 1))), float(h.deriv((0, 2)))]])


def _surface_normal(X: Sequence[Series]) -> np.ndarray:
    xu = np.array([float(x.deriv((1, 0))) for x in X])
    xv = np.array([float(x.deriv((0, 1))) for x in X])
    n = np.cross(xu, xv)
    if np.linalg.norm(n) <= 1e-9 * max(1.0, np.linalg.norm(xu) * np.linalg.norm(xv)):
        raise SurfaceSingular("parametrization is not an immersion here")
    return n / np.linalg.norm(n)


def focal_surface_patch(Z: Congruence, u, v, t, order: int = 3) -> list[Series]:
    """Local parametrization of the focal surface through ``E(u, v, t)``.

    The critical set ``g = 0`` is solved for ``u`` (or ``v``) as a function of
    the remaining parameter and ``t``; the returned series are in those two
    local variables.
    """
    E = exp_map_series(Z, u, v, t, order + 1)
    D = [[e.diff(k) for k in range(3)] for e in E]
    g = det3(D)
    grad = [float(x) for x in _grad3(g)]
    solve = 0 if abs(grad[0]) >= abs(grad[1]) else 1
    if abs(grad[solve]) <= 1e-12 * (1 + abs(grad[2])):
        raise SurfaceSingular("critical set is singular here")
    y, s = Series.variables((0.0, 0.0), order)
    delta = Series.constant(0.0, 2, order)
    for _ in range(order + 2):
        inputs = [delta, y, s] if solve == 0 else [y, delta, s]
        delta = delta - g.compose(inputs) * (1.0 / grad[solve])
    inputs = [delta, y, s] if solve == 0 else [y, delta, s]
    return [e.compose(inputs) for e in E]


def local_convexity_on_parabolic_image(Z: Congruence, u, v, which: str = "focal", tol: float = 1e-8) -> ConvexityReport:
    """Sign of the tangent-plane contact form of the focal or middle surface."""
    j = _require_parabolic(Z, u, v, tol)
    if which == "middle":
        X = middle_surface_series(Z, u, v, 2)
    elif which == "focal":
        X = focal_surface_patch(Z, u, v, _double_root(j), 3)
    else:
        raise ValueError("which must be 'focal' or 'middle'")
    n = _surface_normal(X)
    H = _height_hessian(X, n)
    det = float(np.linalg.det(H))
    hscale = max(1e-300, float(np.abs(H).max()) ** 2)
    verdict = Convexity.HYPERBOLIC if det < -1e-9 * hscale else Convexity.OTHER
    return ConvexityReport(verdict, det, n)
