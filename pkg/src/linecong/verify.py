"""Independent oracles.

Everything here is computed from first principles (finite differences, dense
linear algebra, direct quadratic solving) and is used to certify the analytic
modules.  The oracles only ever evaluate the congruence components pointwise.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .congruence import COMPONENTS, Congruence, Jet, Poly, eval_jet, jet_from_series
from .errors import CongruenceError, NotOnQuadric
from .linespace import canonicalize_plane, segre_factor
from .series import Series

FD_STEP = 1e-4


# -- finite-difference jets --------------------------------------------------------------

def _values(Z: Congruence, u: float, v: float) -> np.ndarray:
    return np.array([float(x) for x in Z.components(u, v)])


def _fd_derivatives(Z: Congruence, u: float, v: float, h: float) -> dict:
    f = lambda du, dv: _values(Z, u + du * h, v + dv * h)  # noqa: E731
    f0 = f(0, 0)
    fu = (f(1, 0) - f(-1, 0)) / (2 * h)
    fv = (f(0, 1) - f(0, -1)) / (2 * h)
    fuu = (f(1, 0) - 2 * f0 + f(-1, 0)) / (h * h)
    fvv = (f(0, 1) - 2 * f0 + f(0, -1)) / (h * h)
    fuv = (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4 * h * h)
    return {(0, 0): f0, (1, 0): fu, (0, 1): fv, (2, 0): fuu, (1, 1): fuv, (0, 2): fvv}


def fd_derivatives(Z: Congruence, u, v, h: float = FD_STEP) -> dict:
    """Derivatives up to order 2 of ``(a1, a2, b1, b2)``, Richardson-extrapolated once."""
    u, v = float(u), float(v)
    for du in (-h, h):
        for dv in (-h, h):
            Z.check_domain(u + du, v + dv)
    d1 = _fd_derivatives(Z, u, v, h)
    d2 = _fd_derivatives(Z, u, v, h / 2)
    return {k: d1[k] if k == (0, 0) else (4 * d2[k] - d1[k]) / 3 for k in d1}


def fd_jet_oracle(Z: Congruence, u, v, h: float = FD_STEP) -> Jet:
    """Order-2 jet by central differences."""
    d = fd_derivatives(Z, u, v, h)
    series = {
        name: Series.from_derivatives({k: float(val[i]) for k, val in d.items()}, 2, 2)
        for i, name in enumerate(COMPONENTS)
    }
    j = jet_from_series(series, (u, v), float(Z.height))
    return j


def jet_residual(Z: Congruence, u, v) -> float:
    """Max relative disagreement between :func:`fd_jet_oracle` and ``eval_jet`` (order <= 2)."""
    fd = fd_jet_oracle(Z, u, v)
    an = eval_jet(Z, u, v, 2)
    worst = 0.0
    for name in COMPONENTS:
        for key in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)):
            x, y = float(fd.deriv(name, *key)), float(an.deriv(name, *key))
            worst = max(worst, abs(x - y) / (1 + abs(y)))
    return worst


# -- determinant identity ---------------------------------------------------------------

def exp_jacobian_fd(Z: Congruence, u, v, t, h: float = FD_STEP) -> np.ndarray:
    """Jacobian of ``(u, v, t) -> b + t a`` with the u, v columns by finite differences."""
    d = fd_derivatives(Z, u, v, h)
    a1, a2 = d[(0, 0)][0], d[(0, 0)][1]
    col_u = np.array([d[(1, 0)][2] + t * d[(1, 0)][0], d[(1, 0)][3] + t * d[(1, 0)][1], 0.0])
    col_v = np.array([d[(0, 1)][2] + t * d[(0, 1)][0], d[(0, 1)][3] + t * d[(0, 1)][1], 0.0])
    return np.column_stack([col_u, col_v, [a1, a2, 1.0]])


def _values_batch(Z: Congruence, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Components at many points, shape (4, n); falls back to a loop for scalar-only families."""
    try:
        vals = [np.broadcast_to(np.asarray(x, dtype=float), us.shape) for x in Z.components(us, vs)]
        return np.array(vals)
    except (TypeError, ValueError):
        return np.array([_values(Z, u, v) for u, v in zip(us, vs)]).T


def _fd_gradients_batch(Z: Congruence, us, vs, h: float = FD_STEP):
    """Richardson-extrapolated central first differences of the components, each (4, n)."""

    def central(k):
        du = (_values_batch(Z, us + k, vs) - _values_batch(Z, us - k, vs)) / (2 * k)
        dv = (_values_batch(Z, us, vs + k) - _values_batch(Z, us, vs - k)) / (2 * k)
        return du, dv

    (u1, v1), (u2, v2) = central(h), central(h / 2)
    return (4 * u2 - u1) / 3, (4 * v2 - v1) / 3


def jacobian_determinant_identity(Z: Congruence, samples) -> float:
    """Max of ``|det_FD D(exp) - g| / (1 + |g|)`` over ``samples`` of ``(u, v, t)``.

    The finite-difference Jacobians are formed for all samples at once; ``g``
    comes from the analytic focal quadratic at each sample.
    """
    from .invariants import focal_quadratic

    samples = np.asarray(samples, dtype=float).reshape(-1, 3)
    if samples.size == 0:
        return 0.0
    us, vs, ts = samples.T
    for u, v in zip(us, vs):
        Z.check_domain(u, v)
    a1, a2, _, _ = _values_batch(Z, us, vs)
    du, dv = _fd_gradients_batch(Z, us, vs)
    J = np.zeros((len(us), 3, 3))
    J[:, 0, 0], J[:, 1, 0] = du[2] + ts * du[0], du[3] + ts * du[1]
    J[:, 0, 1], J[:, 1, 1] = dv[2] + ts * dv[0], dv[3] + ts * dv[1]
    J[:, 0, 2], J[:, 1, 2], J[:, 2, 2] = a1, a2, 1.0
    det = np.linalg.det(J)
    g = np.empty(len(us))
    for n, (u, v, t) in enumerate(samples):
        q2, q1, q0 = (float(x) for x in focal_quadratic(eval_jet(Z, u, v, 1)))
        g[n] = q2 * t * t + q1 * t + q0
    return float(np.max(np.abs(det - g) / (1 + np.abs(g))))


# -- brute-force quadric intersection ------------------------------------------------------

@dataclass
class OracleFocal:
    """Real points of the tangent plane on the quadric, mapped to (t, plane, direction)."""

    kind: str
    ts: list = field(default_factory=list)
    directions: list = field(default_factory=list)
    planes: list = field(default_factory=list)
    coefficients: tuple = ()


def _q(w) -> float:
    return w[0] * w[3] - w[1] * w[2]


def quadric_intersection_oracle(Z: Congruence, z, jet: Jet | None = None) -> OracleFocal:
    """Intersect the tangent 2-plane at ``z`` with the quadric by direct substitution."""
    u, v = z
    j = jet if jet is not None else eval_jet(Z, u, v, 1)
    wu = np.array([float(j[k]) for k in ("a1u", "a2u", "b1u", "b2u")])
    wv = np.array([float(j[k]) for k in ("a1v", "a2v", "b1v", "b2v")])
    # Q(s wu + l wv) = A s^2 + B s l + C l^2
    A = _q(wu)
    C = _q(wv)
    B = _q(wu + wv) - A - C
    disc = B * B - 4 * A * C
    tol = 1e-10 * (1 + B * B + abs(A * C))
    out = OracleFocal("elliptic", coefficients=(A, B, C))
    if disc < -tol:
        return out
    if abs(disc) <= tol:
        out.kind = "parabolic"
        roots = [(-B, 2 * A)] if abs(A) >= abs(C) else [(2 * C, -B)]
    else:
        out.kind = "hyperbolic"
        # stable pair of roots (s : l) via Vieta
        r = -(B + math.copysign(math.sqrt(disc), B))
        roots = [(r, 2 * A), (2 * C, r)]
    a = np.array([float(x) for x in j.a])
    b = np.array([float(x) for x in j.b])
    for s, l in roots:
        d = np.array([s, l], dtype=float)
        d /= np.linalg.norm(d)
        w = d[0] * wu + d[1] * wv
        if np.linalg.norm(w) == 0:
            raise NotOnQuadric("torsal direction with zero tangent vector")
        sp = segre_factor(w, tol=1e-6, point_tol=1e-12)
        c1, c2 = sp.plane_covector
        plane = canonicalize_plane([c1, c2, -(c1 * a[0] + c2 * a[1])], c1 * b[0] + c2 * b[1])
        out.ts.append(sp.t)
        out.directions.append(d)
        out.planes.append(plane)
    order = np.argsort(out.ts)
    out.ts = [out.ts[i] for i in order]
    out.directions = [out.directions[i] for i in order]
    out.planes = [out.planes[i] for i in order]
    return out


def compare_with_focal_data(Z: Congruence, z, tol: float = 1e-8) -> tuple[bool, float]:
    """Check the analytic focal data against :func:`quadric_intersection_oracle`."""
    from .invariants import focal_data

    j = eval_jet(Z, z[0], z[1], 1)
    fd = focal_data(j)
    orc = quadric_intersection_oracle(Z, z, j)
    if fd.kind.value != orc.kind:
        return False, math.inf
    entries = sorted(fd.entries, key=lambda e: e.t)
    if len(entries) != len(orc.ts):
        return False, math.inf
    worst = 0.0
    for e, t, d, P in zip(entries, orc.ts, orc.directions, orc.planes):
        if math.isinf(e.t) or math.isinf(t):
            if not (math.isinf(e.t) and math.isinf(t)):
                return False, math.inf
        else:
            worst = max(worst, abs(e.t - t) / (1 + abs(t)))
        dd = e.direction / np.linalg.norm(e.direction)
        worst = max(worst, min(np.linalg.norm(dd - d), np.linalg.norm(dd + d)))
        if e.plane is None:
            return False, math.inf
        x = np.append(e.plane.c, e.plane.d)
        y = np.append(P.c, P.d)
        x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
        worst = max(worst, min(np.linalg.norm(x - y), np.linalg.norm(x + y)))
    return worst <= tol, worst


# -- midpoint reality ----------------------------------------------------------------------

@dataclass
class RealityResult:
    passed: bool
    trials: int
    max_imag: float
    max_conj_error: float
    max_mid_error: float
    failures: list = field(default_factory=list)


def random_poly(rng: np.random.Generator, degree: int) -> Poly:
    return Poly({(i, j): float(rng.uniform(-1, 1)) for i in range(degree + 1) for j in range(degree + 1 - i)})


def random_bchart(rng: np.random.Generator, degree: int = 3) -> Congruence:
    return Congruence.bchart(random_poly(rng, degree), random_poly(rng, degree))


def middle_reality_property(trials: int = 1000, degree: int = 3, seed: int = 42, tol: float = 1e-12) -> RealityResult:
    """At random elliptic points the focal roots are conjugate and their midpoint is real."""
    from .invariants import middle_parameter

    rng = np.random.default_rng(seed)
    found = 0
    max_imag = max_conj = max_mid = 0.0
    failures = []
    attempts = 0
    while found < trials and attempts < 200 * trials:
        attempts += 1
        Z = random_bchart(rng, degree)
        u, v = rng.uniform(-1, 1, 2)
        j = eval_jet(Z, u, v, 1)
        q2, q1, q0 = (float(x) for x in (
            j["a1u"] * j["a2v"] - j["a1v"] * j["a2u"],
            j["a1u"] * j["b2v"] + j["b1u"] * j["a2v"] - j["a1v"] * j["b2u"] - j["b1v"] * j["a2u"],
            j["b1u"] * j["b2v"] - j["b1v"] * j["b2u"],
        ))
        if q1 * q1 - 4 * q2 * q0 >= 0 or q2 == 0:
            continue
        found += 1
        r = cmath.sqrt(q1 * q1 - 4 * q2 * q0)
        t1, t2 = (-q1 - r) / (2 * q2), (-q1 + r) / (2 * q2)
        mid = (t1 + t2) / 2
        conj = abs(t1 - t2.conjugate()) / (1 + abs(t1))
        m = middle_parameter(j)
        mid_err = abs(mid.real - float(m)) / (1 + abs(mid.real))
        max_imag = max(max_imag, abs(mid.imag))
        max_conj = max(max_conj, conj)
        max_mid = max(max_mid, mid_err)
        if abs(mid.imag) >= tol or conj > 1e-9 or mid_err > 1e-9:
            failures.append((u, v))
    passed = found == trials and not failures
    return RealityResult(passed, found, max_imag, max_conj, max_mid, failures)


# -- rank ------------------------------------------------------------------------------------

def rank_oracle(M, point=None, rel_tol: float = 1e-9) -> int:
    """Numerical rank by singular values, threshold ``rel_tol * sigma_max``."""
    if callable(M):
        M = M(*point)
    M = np.atleast_2d(np.asarray(M, dtype=float))
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def middle_jacobian_fd(Z: Congruence, u, v, h: float = FD_STEP) -> np.ndarray:
    """3x2 Jacobian of the middle surface by differencing the middle point."""

    def mid(uu, vv):
        d = fd_derivatives(Z, uu, vv, h)
        (a1u, a2u, b1u, b2u), (a1v, a2v, b1v, b2v) = d[(1, 0)], d[(0, 1)]
        a1, a2, b1, b2 = d[(0, 0)]
        q2 = a1u * a2v - a1v * a2u
        q1 = a1u * b2v + b1u * a2v - a1v * b2u - b1v * a2u
        m = -q1 / (2 * q2)
        return np.array([b1 + m * a1, b2 + m * a2, float(Z.height) + m])

    k = 1e-3
    cu = (mid(u + k, v) - mid(u - k, v)) / (2 * k)
    cv = (mid(u, v + k) - mid(u, v - k)) / (2 * k)
    return np.column_stack([cu, cv])


# -- suite ---------------------------------------------------------------------------------

@dataclass
class SuiteResult:
    passed: bool
    residuals: dict
    checks: dict


def run_suite(Z: Congruence, samples: int = 200, seed: int = 0) -> SuiteResult:
    """All oracles on ``Z`` at random interior points."""
    from .invariants import classify_point

    rng = np.random.default_rng(seed)
    dom = Z.domain
    umin, umax, vmin, vmax = dom.as_tuple() if dom is not None else (-1.0, 1.0, -1.0, 1.0)
    pad = 0.01 * max(umax - umin, vmax - vmin)
    pts = np.column_stack([
        rng.uniform(umin + pad, umax - pad, samples),
        rng.uniform(vmin + pad, vmax - pad, samples),
    ])
    res: dict = {}
    ok: dict = {}

    res["jet"] = max(jet_residual(Z, u, v) for u, v in pts)
    ok["jet"] = res["jet"] < 1e-6

    if Z.chart == "b":
        ts = rng.uniform(-2, 2, samples)
        res["determinant"] = jacobian_determinant_identity(Z, [(u, v, t) for (u, v), t in zip(pts, ts)])
        ok["determinant"] = res["determinant"] < 1e-6

    worst = 0.0
    agree = True
    for z in pts:
        try:
            good, w = compare_with_focal_data(Z, z)
        except CongruenceError:
            continue
        agree &= good
        worst = max(worst, w)
    res["quadric"] = worst
    ok["quadric"] = agree

    r = middle_reality_property(min(samples, 1000), 3, seed)
    res["middle_imag"] = r.max_imag
    ok["middle_reality"] = r.passed

    mismatch = 0
    for u, v in pts:
        j = eval_jet(Z, u, v, 1)
        A_ = np.array([[j["a1u"], j["a1v"]], [j["a2u"], j["a2v"]]], dtype=float)
        if (rank_oracle(A_) < 2) != classify_point(j).stall and np.abs(A_).max() > 0:
            mismatch += 1
    res["stall_rank_mismatch"] = mismatch
    ok["stall_rank"] = mismatch == 0
    return SuiteResult(all(ok.values()), res, ok)
