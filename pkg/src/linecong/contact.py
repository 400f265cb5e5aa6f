"""Contact of a congruence with model families of lines.

Each model family gives a map germ on the congruence parameters whose
K-singularity type is the contact type.  The germs are built as exact
truncated series and classified numerically (A_k by the first nonvanishing
order of a one-variable reduction, D4 by a nondegenerate cubic).  Where a
closed-form criterion in a normalized frame is known it is evaluated too and
recorded in the report so the two routes can be compared.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .congruence import NON_ELLIPTIC, Congruence, eval_jet, normalize_at_point, reparametrize
from .errors import CongruenceError, EqualLines, NotContained, NotIncident
from .invariants import PointKind, classify_point, focal_quadratic
from .linespace import IncidenceKind, Line, Plane, line_incidence
from .series import Series

DEFAULT_ORDER = 7


class ContactType(str, Enum):
    A0 = "A0"
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    AK_HIGHER = "AkHigher"
    D4 = "D4"
    DEGENERATE = "Degenerate"

    @classmethod
    def from_k(cls, k: int) -> "ContactType":
        return [cls.A0, cls.A1, cls.A2, cls.A3][k] if k <= 3 else cls.AK_HIGHER

    @property
    def singular(self) -> bool:
        return self is not ContactType.A0


class Model(str, Enum):
    POINT = "Point"
    PLANE = "Plane"
    DIRECTION = "Direction"
    PARALLEL_PLANES = "ParallelPlanes"
    PENCIL = "Pencil"
    LINE_INCIDENCE = "LineIncidence"
    LINE_SELF = "LineSelf"


@dataclass
class GermClass:
    type: ContactType
    k: int | None = None
    rank: int | None = None
    info: dict = field(default_factory=dict)


@dataclass
class ContactReport:
    model: Model
    type: ContactType
    witness: dict
    normalization: dict | None = None
    germ: GermClass | None = None

    @property
    def singular(self) -> bool:
        return self.type.singular

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "type": self.type.value,
            "witness": _jsonable(self.witness),
            "normalization": _jsonable(self.normalization),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, (Line,)):
        return {"a": x.a.tolist(), "b": x.b.tolist()}
    if isinstance(x, Plane):
        return {"c": x.c.tolist(), "d": x.d}
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)


# -- germ classification ---------------------------------------------------------------

def _scale(series_list) -> float:
    m = 0.0
    for s in series_list:
        for v in s.coeffs.values():
            m = max(m, abs(float(v)))
    return max(m, 1.0)


def _first_order_nonzero(g: Series, tol: float, start: int = 1) -> int | None:
    for k in range(start, g.order + 1):
        if abs(float(g.coeff((k,)))) > tol:
            return k
    return None


def _compose1(f: Series, inputs, order: int) -> Series:
    r = f.compose(inputs)
    return r if isinstance(r, Series) else Series.constant(r, 1, order)


def _solve_implicit(f: Series, var: int, n_iter: int) -> Series:
    """Series ``X(y)`` with ``f(X, y) = 0`` (or ``f(y, X) = 0``) and ``X(0) = 0``."""
    order = f.order
    (y,) = Series.variables((0.0,), order)
    slope = float(f.deriv((1, 0) if var == 0 else (0, 1)))
    X = Series.constant(0.0, 1, order)
    for _ in range(n_iter):
        inputs = [X, y] if var == 0 else [y, X]
        X = X - _compose1(f, inputs, order) * (1.0 / slope)
        X = X.shift()  # the solution passes through the origin
    return X


def classify_function_germ(f: Series, tol: float = 1e-7) -> GermClass:
    """K-type of a function germ ``f: (R^2, 0) -> (R, 0)`` given as a series in offsets."""
    f = f.to_float()
    scale = _scale([f])
    eps = tol * scale
    g = np.array([f.coeff((1, 0)), f.coeff((0, 1))], dtype=float)
    if np.linalg.norm(g) > eps:
        return GermClass(ContactType.A0, 0, info={"gradient": g})
    H = np.array([[2 * f.coeff((2, 0)), f.coeff((1, 1))], [f.coeff((1, 1)), 2 * f.coeff((0, 2))]], dtype=float)
    w, V = np.linalg.eigh(H)
    nz = np.abs(w) > eps
    info = {"hessian": H, "hessian_det": float(np.linalg.det(H))}
    if nz.all():
        info["sign"] = "-" if w[0] * w[1] < 0 else "+"
        return GermClass(ContactType.A1, 1, 2, info)
    if nz.any():
        i = int(np.argmax(np.abs(w)))
        e1, e2 = V[:, i], V[:, 1 - i]
        X, Y = Series.variables((0.0, 0.0), f.order)
        rot = f.compose([e1[0] * X + e2[0] * Y, e1[1] * X + e2[1] * Y])
        Xs = _solve_implicit(rot.diff(0), 0, f.order + 1)
        (y,) = Series.variables((0.0,), f.order)
        reduced = _compose1(rot, [Xs, y], f.order)
        k = _first_order_nonzero(reduced, eps, start=3)
        info["reduced"] = [float(reduced.coeff((n,))) for n in range(reduced.order + 1)]
        if k is None:
            info["lower_bound_k"] = f.order
            return GermClass(ContactType.DEGENERATE, None, 1, info)
        return GermClass(ContactType.from_k(k - 1), k - 1, 1, info)
    a, b, c, d = (float(f.coeff(m)) for m in ((3, 0), (2, 1), (1, 2), (0, 3)))
    disc = b * b * c * c - 4 * a * c**3 - 4 * b**3 * d - 27 * a * a * d * d + 18 * a * b * c * d
    info["cubic"] = (a, b, c, d)
    info["cubic_discriminant"] = disc
    if abs(disc) > tol * scale**4:
        return GermClass(ContactType.D4, None, 0, info)
    return GermClass(ContactType.DEGENERATE, None, 0, info)


def classify_map_germ(fs: list[Series], tol: float = 1e-7) -> GermClass:
    """K-type of a map germ ``(R^2, 0) -> (R^p, 0)``, p >= 2."""
    fs = [f.to_float() for f in fs]
    scale = _scale(fs)
    eps = tol * scale
    J = np.array([[f.coeff((1, 0)), f.coeff((0, 1))] for f in fs], dtype=float)
    sv = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(sv > eps))
    info = {"jacobian": J, "singular_values": sv}
    if rank >= 2:
        return GermClass(ContactType.A0, 0, 2, info)
    if rank == 0:
        return GermClass(ContactType.DEGENERATE, None, 0, info)
    i = int(np.argmax(np.linalg.norm(J, axis=1)))
    var = int(np.argmax(np.abs(J[i])))
    order = fs[0].order
    Xs = _solve_implicit(fs[i], var, order + 1)
    (y,) = Series.variables((0.0,), order)
    inputs = [Xs, y] if var == 0 else [y, Xs]
    ks = []
    reduced = []
    for n, f in enumerate(fs):
        if n == i:
            continue
        r = _compose1(f, inputs, order)
        reduced.append([float(r.coeff((m,))) for m in range(r.order + 1)])
        k = _first_order_nonzero(r, eps, start=1)
        if k is not None:
            ks.append(k)
    info["reduced"] = reduced
    if not ks:
        info["lower_bound_k"] = order
        return GermClass(ContactType.DEGENERATE, None, 1, info)
    m = min(ks)
    return GermClass(ContactType.from_k(m - 1), m - 1, 1, info)


# -- helpers -------------------------------------------------------------------------

def _local(Z: Congruence, z, order: int):
    u, v = z
    Z.check_domain(u, v)
    s = Z.local_series(u, v, order)
    return s["a1"].to_float(), s["a2"].to_float(), s["b1"].to_float(), s["b2"].to_float()


def _line_at(Z: Congruence, z) -> Line:
    return Z.line(*z)


def _on_line(line: Line, p, tol=1e-9) -> bool:
    return line.distance_to(p) <= tol * (1 + float(np.linalg.norm(p)))


def _nf_dict(nf) -> dict:
    return {"A": nf.A, "T": nf.T, "identity": nf.identity, "mode": nf.mode}


# -- model families ---------------------------------------------------------------------

def contact_with_point_family(Z: Congruence, z, p, order: int = DEFAULT_ORDER) -> ContactReport:
    """Contact with the lines through the point ``p``."""
    p = np.asarray(p, dtype=float)
    line = _line_at(Z, z)
    if not _on_line(line, p):
        raise NotIncident(f"{p.tolist()} is not on the line at {tuple(z)}")
    a1, a2, b1, b2 = _local(Z, z, order)
    t = float(p[2] - float(Z.height))
    germ = classify_map_germ([b1 + t * a1 - p[0], b2 + t * a2 - p[1]])
    j = eval_jet(Z, z[0], z[1], 1)
    q2, q1, q0 = (float(x) for x in focal_quadratic(j))
    witness = {"point": p, "z": tuple(z), "t": t, "g": q2 * t * t + q1 * t + q0}
    normalization = None
    if germ.type.singular:
        try:
            nf = normalize_at_point(Z, z[0], z[1], NON_ELLIPTIC, focal_t=t)
            jn = nf.jet(3)
            witness["singular_expr"] = jn["b1u"] * jn["b2v"] - jn["b1v"] * jn["b2u"]
            witness["a2_expr"] = jn["b1v"] * jn["b2uu"] - jn["b2v"] * jn["b1uu"]
            normalization = _nf_dict(nf)
        except CongruenceError as exc:
            witness["normalization_error"] = str(exc)
    return ContactReport(Model.POINT, germ.type, witness, normalization, germ)


def _plane_frame(Z: Congruence, z, c: np.ndarray):
    """Affine frame with the plane ``c`` as ``x2 = 0`` and the base point at the origin."""
    j = eval_jet(Z, z[0], z[1], 1)
    a0 = np.array([float(x) for x in j.a])
    b0 = np.array([float(x) for x in j.b])
    best = None
    for i in (0, 1):
        e = np.zeros(3)
        e[i] = 1.0
        cand = e - a0[i] * np.array([0.0, 0.0, 1.0])
        score = np.linalg.norm(np.cross(cand, c))
        if best is None or score > best[0]:
            best = (score, cand)
    A = np.vstack([best[1], c / np.abs(c).max(), [0.0, 0.0, 1.0]])
    return reparametrize(Z, z[0], z[1], A, -A @ b0)


def contact_with_plane_family(Z: Congruence, z, P: Plane, order: int = DEFAULT_ORDER) -> ContactReport:
    """Contact with the lines lying in the plane ``P``."""
    line = _line_at(Z, z)
    if not P.contains_line(line):
        raise NotContained("the line is not contained in the plane")
    a1, a2, b1, b2 = _local(Z, z, order)
    c, d = P.c, P.d
    h = float(Z.height)
    f1 = c[0] * a1 + c[1] * a2 + c[2]
    f2 = c[0] * b1 + c[1] * b2 + (c[2] * h - d)
    germ = classify_map_germ([f1, f2])
    witness: dict = {"plane": P, "z": tuple(z)}
    normalization = None
    try:
        nf = _plane_frame(Z, z, np.asarray(c, dtype=float))
        jn = nf.jet(3)
        witness.update(b2u=jn["b2u"], b2uu=jn["b2uu"], b2uuu=jn["b2uuu"])
        normalization = _nf_dict(nf)
    except CongruenceError as exc:
        witness["normalization_error"] = str(exc)
    return ContactReport(Model.PLANE, germ.type, witness, normalization, germ)


class DirectionMapKind(str, Enum):
    REGULAR = "regular"
    FOLD = "fold"
    CUSP = "cusp"
    DEGENERATE = "degenerate"


def direction_map_kind(Z: Congruence, z, order: int = 5, tol: float = 1e-9) -> tuple[DirectionMapKind, dict]:
    """Whitney classification of ``(u, v) -> (a1, a2)``."""
    a1, a2, _, _ = _local(Z, z, order)
    p, q = a1.diff(0), a1.diff(1)
    r, s = a2.diff(0), a2.diff(1)
    lam = p * s - q * r
    Jf = np.array([[p.value, q.value], [r.value, s.value]], dtype=float)
    scale = max(1.0, float(np.abs(Jf).max()))
    info = {"jacobian_det": float(lam.value)}
    if abs(float(lam.value)) > tol * scale**2:
        return DirectionMapKind.REGULAR, info
    if np.abs(Jf).max() <= tol:
        return DirectionMapKind.DEGENERATE, info
    if np.linalg.norm(Jf[0]) >= np.linalg.norm(Jf[1]):
        eta = (-q, p)
    else:
        eta = (s, -r)
    o = lam.order - 1
    eta = (eta[0].truncate(o), eta[1].truncate(o))
    d1 = lam.diff(0) * eta[0] + lam.diff(1) * eta[1]
    info["eta_lambda"] = float(d1.value)
    grad = np.array([float(lam.deriv((1, 0))), float(lam.deriv((0, 1)))])
    if np.linalg.norm(grad) <= tol * scale**2:
        return DirectionMapKind.DEGENERATE, info
    gscale = 1 + float(np.linalg.norm(grad))
    if abs(float(d1.value)) > tol * gscale * scale:
        return DirectionMapKind.FOLD, info
    o = d1.order - 1
    d2 = d1.diff(0) * eta[0].truncate(o) + d1.diff(1) * eta[1].truncate(o)
    info["eta_eta_lambda"] = float(d2.value)
    if abs(float(d2.value)) > tol * gscale * scale**2:
        return DirectionMapKind.CUSP, info
    return DirectionMapKind.DEGENERATE, info


_DIRECTION_TYPE = {
    DirectionMapKind.REGULAR: ContactType.A0,
    DirectionMapKind.FOLD: ContactType.A1,
    DirectionMapKind.CUSP: ContactType.A2,
    DirectionMapKind.DEGENERATE: ContactType.DEGENERATE,
}


def classify_direction_map(Z: Congruence, z, order: int = DEFAULT_ORDER) -> ContactReport:
    """Contact with the lines parallel to the direction at ``z``."""
    kind, info = direction_map_kind(Z, z)
    a1, a2, _, _ = _local(Z, z, order)
    germ = classify_map_germ([a1.shift(), a2.shift()])
    witness = {"z": tuple(z), "whitney": kind.value, "germ_type": germ.type.value, **info}
    return ContactReport(Model.DIRECTION, _DIRECTION_TYPE[kind], witness, None, germ)


def contact_parallel_planes(Z: Congruence, z, alpha, order: int = DEFAULT_ORDER, tol: float = 1e-9) -> ContactReport:
    """Contact with the lines lying in the planes ``alpha(x) = const``."""
    alpha = np.asarray(alpha, dtype=float)
    if not np.any(alpha):
        raise ValueError("covector is zero")
    a1, a2, _, _ = _local(Z, z, order)
    f = alpha[0] * a1 + alpha[1] * a2 + alpha[2]
    if abs(float(f.value)) > tol * float(np.abs(alpha).max()) * (1 + abs(float(a1.value)) + abs(float(a2.value))):
        raise NotIncident("the line is not parallel to the planes")
    germ = classify_function_germ(f.shift())
    witness = {"alpha": alpha, "z": tuple(z), **{k: v for k, v in germ.info.items() if k in ("gradient", "hessian_det")}}
    return ContactReport(Model.PARALLEL_PLANES, germ.type, witness, None, germ)


def contact_pencil(Z: Congruence, z, p, P: Plane, order: int = DEFAULT_ORDER) -> ContactReport:
    """Contact with the lines through ``p`` lying in ``P``."""
    p = np.asarray(p, dtype=float)
    line = _line_at(Z, z)
    if not _on_line(line, p):
        raise NotIncident("the point is not on the line")
    if not P.contains_line(line):
        raise NotContained("the line is not contained in the plane")
    a1, a2, b1, b2 = _local(Z, z, order)
    t = float(p[2] - float(Z.height))
    c = P.c
    fs = [c[0] * a1 + c[1] * a2 + c[2], b1 + t * a1 - p[0], b2 + t * a2 - p[1]]
    germ = classify_map_germ(fs)
    witness = {"point": p, "plane": P, "z": tuple(z), "rank": germ.rank}
    return ContactReport(Model.PENCIL, germ.type, witness, None, germ)


def incidence_function(Z: Congruence, z, L: Line, order: int = DEFAULT_ORDER) -> Series:
    """``det[a(u, v), a_L, b(u, v) - b_L]`` as a series at ``z``; zero iff the lines are coplanar."""
    a1, a2, b1, b2 = _local(Z, z, order)
    aL, bL = L.a, L.b
    h = float(Z.height)
    a = (a1, a2, 1.0)
    r = (b1 - bL[0], b2 - bL[1], h - bL[2])
    # det of rows a, aL, r
    return (
        a[0] * (aL[1] * r[2] - aL[2] * r[1])
        - a[1] * (aL[0] * r[2] - aL[2] * r[0])
        + a[2] * (aL[0] * r[1] - aL[1] * r[0])
    )


def contact_line_incidence(Z: Congruence, z, L: Line, order: int = DEFAULT_ORDER) -> ContactReport:
    """Contact with the lines meeting ``L``."""
    line = _line_at(Z, z)
    inc = line_incidence(line, L)
    if inc.kind is IncidenceKind.EQUAL:
        raise EqualLines("use contact_line_self for the line of the congruence itself")
    if inc.kind is IncidenceKind.SKEW:
        raise NotIncident("the lines are skew")
    F = incidence_function(Z, z, L, order)
    germ = classify_function_germ(F.shift())
    witness = {"line": L, "z": tuple(z), "incidence": inc.kind.value}
    if inc.point is not None:
        witness["meet"] = inc.point
    witness.update({k: v for k, v in germ.info.items() if k in ("hessian_det", "cubic_discriminant")})
    return ContactReport(Model.LINE_INCIDENCE, germ.type, witness, None, germ)


def contact_line_self(Z: Congruence, z, order: int = DEFAULT_ORDER) -> ContactReport:
    """Contact of the congruence with the lines meeting its own line at ``z``."""
    line = _line_at(Z, z)
    F = incidence_function(Z, z, line, order)
    germ = classify_function_germ(F.shift())
    j = eval_jet(Z, z[0], z[1], 1)
    cls = classify_point(j)
    witness: dict = {
        "z": tuple(z),
        "point_kind": cls.kind.value,
        "delta": float(cls.delta),
        "morse": germ.type is ContactType.A1,
    }
    normalization = None
    if cls.kind is PointKind.PARABOLIC:
        try:
            nf = normalize_at_point(Z, z[0], z[1], NON_ELLIPTIC)
            jn = nf.jet(3)
            witness["b2uu"] = jn["b2uu"]
            witness["rule_type"] = "A3" if abs(float(jn["b2uu"])) <= 1e-9 else "A2"
            normalization = _nf_dict(nf)
        except CongruenceError as exc:
            witness["normalization_error"] = str(exc)
    return ContactReport(Model.LINE_SELF, germ.type, witness, normalization, germ)
