"""Congruences as parametrized families of lines, their jets and normal forms.

Every congruence here lives in the chart ``a = (a1, a2, 1)``,
``b = (b1, b2, h)`` where ``h`` is a constant height (zero unless the
congruence was re-based with :func:`rechart_at_height`).  The four component
functions may be :class:`Poly` objects (differentiated exactly) or callables
that accept both floats and :class:`~linecong.series.Series` arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateFocalData,
    NotHyperbolic,
    NotNonElliptic,
    OutOfDomain,
    StallPoint,
)
from .linespace import Line, canonicalize_line, check_invertible
from .series import Series, constant_of

COMPONENTS = ("a1", "a2", "b1", "b2")
CHARTS = ("b", "a", "general")


class Poly:
    """Sparse bivariate polynomial ``sum c[i, j] u^i v^j``."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError("negative exponent")
            if c != 0:
                self.terms[(int(i), int(j))] = self.terms.get((int(i), int(j)), 0) + c

    @classmethod
    def zero(cls) -> "Poly":
        return cls()

    @classmethod
    def u(cls) -> "Poly":
        return cls({(1, 0): 1})

    @classmethod
    def v(cls) -> "Poly":
        return cls({(0, 1): 1})

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    def __call__(self, u, v):
        total = 0
        for (i, j), c in self.terms.items():
            total = total + c * (u**i if i else 1) * (v**j if j else 1)
        return total

    def taylor(self, u0, v0, order: int) -> Series:
        """Exact Taylor expansion at ``(u0, v0)`` truncated at ``order``."""
        coeffs: dict = {}
        for (i, j), c in self.terms.items():
            for p in range(min(i, order) + 1):
                cu = math.comb(i, p) * (u0 ** (i - p) if i - p else 1)
                for q in range(min(j, order - p) + 1):
                    cv = math.comb(j, q) * (v0 ** (j - q) if j - q else 1)
                    coeffs[(p, q)] = coeffs.get((p, q), 0) + c * cu * cv
        return Series(coeffs, 2, order)

    def __add__(self, other: "Poly") -> "Poly":
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return Poly(t)

    def __neg__(self) -> "Poly":
        return Poly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, s) -> "Poly":
        return Poly({k: s * c for k, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        t: dict = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                t[k] = t.get(k, 0) + c1 * c2
        return Poly(t)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "Poly(0)"
        return "Poly(" + " + ".join(f"{c}*u^{i}*v^{j}" for (i, j), c in sorted(self.terms.items())) + ")"


def _as_component(f):
    if f is None:
        return Poly.zero()
    if isinstance(f, (Poly,)) or callable(f):
        return f
    if isinstance(f, dict):
        return Poly(f)
    if isinstance(f, (int, float, Fraction)):
        return Poly({(0, 0): f})
    raise TypeError(f"cannot use {type(f).__name__} as a congruence component")


@dataclass(frozen=True)
class Domain:
    umin: float
    umax: float
    vmin: float
    vmax: float

    def __post_init__(self):
        if not (self.umin < self.umax and self.vmin < self.vmax):
            raise ValueError("domain rectangle is empty")

    def contains(self, u, v, slack: float = 1e-12) -> bool:
        su = slack * (1 + abs(self.umax - self.umin))
        sv = slack * (1 + abs(self.vmax - self.vmin))
        return self.umin - su <= u <= self.umax + su and self.vmin - sv <= v <= self.vmax + sv

    def grid(self, nu: int, nv: int) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint-inclusive sample coordinates."""
        return np.linspace(self.umin, self.umax, nu), np.linspace(self.vmin, self.vmax, nv)

    def as_tuple(self):
        return (self.umin, self.umax, self.vmin, self.vmax)


class Congruence:
    """Family of lines ``(u, v) -> [(a1, a2, 1), (b1, b2, height)]``.

    ``chart`` is ``"b"`` (``a1 = u, a2 = v``), ``"a"`` (``b1 = u, b2 = v``) or
    ``"general"``.  ``evaluator`` optionally replaces the four separate
    components with a single callable returning ``(a1, a2, b1, b2)``.
    """

    def __init__(
        self,
        chart: str = "b",
        a1=None,
        a2=None,
        b1=None,
        b2=None,
        domain: Domain | Sequence[float] | None = None,
        height=0,
        evaluator: Callable | None = None,
        name: str | None = None,
    ):
        if chart not in CHARTS:
            raise ValueError(f"unknown chart {chart!r}")
        self.chart = chart
        if chart == "b":
            a1, a2 = Poly.u(), Poly.v()
        elif chart == "a":
            b1, b2 = Poly.u(), Poly.v()
        self.a1 = _as_component(a1)
        self.a2 = _as_component(a2)
        self.b1 = _as_component(b1)
        self.b2 = _as_component(b2)
        if domain is not None and not isinstance(domain, Domain):
            domain = Domain(*domain)
        self.domain = domain
        self.height = height
        self.evaluator = evaluator
        self.name = name

    # -- constructors -----------------------------------------------------
    @classmethod
    def bchart(cls, b1, b2, domain=None, **kw) -> "Congruence":
        return cls("b", b1=b1, b2=b2, domain=domain, **kw)

    @classmethod
    def achart(cls, a1, a2, domain=None, **kw) -> "Congruence":
        return cls("a", a1=a1, a2=a2, domain=domain, **kw)

    @property
    def is_polynomial(self) -> bool:
        return self.evaluator is None and all(isinstance(f, Poly) for f in self.component_funcs())

    def component_funcs(self) -> tuple:
        return (self.a1, self.a2, self.b1, self.b2)

    def check_domain(self, u, v) -> None:
        if self.domain is not None and not self.domain.contains(float(u), float(v)):
            raise OutOfDomain(f"({float(u)}, {float(v)}) outside {self.domain.as_tuple()}")

    def components(self, u, v) -> tuple:
        """(a1, a2, b1, b2) at ``(u, v)``; works on numbers and series."""
        if self.evaluator is not None:
            return tuple(self.evaluator(u, v))
        return tuple(f(u, v) for f in self.component_funcs())

    def local_series(self, u0, v0, order: int) -> dict[str, Series]:
        """Taylor expansions of the four components at ``(u0, v0)``."""
        if self.is_polynomial:
            return {n: f.taylor(u0, v0, order) for n, f in zip(COMPONENTS, self.component_funcs())}
        x, y = Series.variables((u0, v0), order)
        vals = self.components(x, y)
        out = {}
        for n, s in zip(COMPONENTS, vals):
            if not isinstance(s, Series):
                s = Series.constant(s, 2, order)
            out[n] = s
        return out

    def direction(self, u, v) -> np.ndarray:
        a1, a2, _, _ = self.components(u, v)
        return np.array([float(a1), float(a2), 1.0])

    def base(self, u, v) -> np.ndarray:
        _, _, b1, b2 = self.components(u, v)
        return np.array([float(b1), float(b2), float(self.height)])

    def line(self, u, v) -> Line:
        a1, a2, b1, b2 = (float(x) for x in self.components(u, v))
        return canonicalize_line([a1, a2, 1.0], [b1, b2, float(self.height)])

    def transformed(self, A, T) -> "Congruence":
        """The image congruence ``(A, T) * Z`` with the same parameters."""
        A = check_invertible(A)
        T = np.asarray(T, dtype=float)
        h = self.height
        src = self

        def evaluator(u, v):
            a1, a2, b1, b2 = src.components(u, v)
            a = (a1, a2, 1)
            b = (b1, b2, h)
            na = [A[i, 0] * a[0] + A[i, 1] * a[1] + A[i, 2] * a[2] for i in range(3)]
            nb = [A[i, 0] * b[0] + A[i, 1] * b[1] + A[i, 2] * b[2] + T[i] for i in range(3)]
            inv = 1 / na[2]
            a1n, a2n = na[0] * inv, na[1] * inv
            return a1n, a2n, nb[0] - nb[2] * a1n, nb[1] - nb[2] * a2n

        c0 = self.domain
        return Congruence("general", domain=c0, evaluator=evaluator, name=self.name)

    def __repr__(self) -> str:
        dom = self.domain.as_tuple() if self.domain else None
        return f"Congruence(chart={self.chart!r}, domain={dom}, height={self.height})"


def fig1_congruence(domain=(-1.0, 1.0, -1.0, 1.0)) -> Congruence:
    """Example congruence whose middle surface has a cross-cap at the origin."""
    b1 = Poly({(0, 1): 2, (2, 0): 1, (1, 1): 5, (0, 2): -1, (3, 0): -3, (2, 1): -1, (1, 2): 7, (0, 3): 1})
    b2 = Poly({(2, 0): 7, (1, 1): -2, (0, 2): 3, (3, 0): 5, (2, 1): -2, (1, 2): 11, (0, 3): 1})
    return Congruence.bchart(b1, b2, domain=domain, name="fig1")


# -- jets -----------------------------------------------------------------------

def _parse_key(key: str) -> tuple[str, tuple[int, int]]:
    name, rest = key[:2], key[2:]
    if name not in COMPONENTS or any(ch not in "uv" for ch in rest):
        raise KeyError(key)
    return name, (rest.count("u"), rest.count("v"))


@dataclass
class Jet:
    """Partial derivatives of ``(a1, a2, b1, b2)`` at a parameter point.

    ``jet["b2uv"]`` is the mixed second derivative of ``b2``.
    """

    point: tuple
    order: int
    series: dict
    height: object = 0
    chart: str = "general"

    def __getitem__(self, key: str):
        name, (i, j) = _parse_key(key)
        return self.series[name].deriv((i, j))

    def deriv(self, name: str, i: int, j: int):
        return self.series[name].deriv((i, j))

    def first_order(self) -> tuple[np.ndarray, np.ndarray]:
        """Jacobians ``d(a1, a2)/d(u, v)`` and ``d(b1, b2)/d(u, v)``."""
        g = self.__getitem__
        A = np.array([[g("a1u"), g("a1v")], [g("a2u"), g("a2v")]], dtype=object)
        B = np.array([[g("b1u"), g("b1v")], [g("b2u"), g("b2v")]], dtype=object)
        return A, B

    @property
    def a(self) -> tuple:
        return (self.series["a1"].value, self.series["a2"].value, 1)

    @property
    def b(self) -> tuple:
        return (self.series["b1"].value, self.series["b2"].value, self.height)

    def line(self) -> Line:
        return canonicalize_line(np.array(self.a, dtype=float), np.array(self.b, dtype=float))


def eval_jet(Z: Congruence, u, v, order: int = 3) -> Jet:
    if order < 1:
        raise ValueError("jet order must be at least 1")
    Z.check_domain(u, v)
    return Jet((u, v), order, Z.local_series(u, v, order), Z.height, Z.chart)


def jet_from_series(series: dict, point=(0, 0), height=0) -> Jet:
    order = min(s.order for s in series.values())
    return Jet(point, order, series, height)


def rechart_at_height(Z: Congruence, c) -> Congruence:
    """Same lines re-based on the plane ``x3 = height + c``."""
    if c == 0:
        return Z
    if Z.chart == "a":
        raise ValueError("re-basing a direction-chart congruence changes its chart; use chart 'general'")
    if Z.evaluator is None and all(isinstance(f, Poly) for f in Z.component_funcs()):
        b1 = Z.b1 + Z.a1.scale(c)
        b2 = Z.b2 + Z.a2.scale(c)
        return Congruence(Z.chart if Z.chart == "b" else "general", a1=Z.a1, a2=Z.a2, b1=b1, b2=b2,
                          domain=Z.domain, height=Z.height + c, name=Z.name)
    src = Z

    def evaluator(u, v):
        a1, a2, b1, b2 = src.components(u, v)
        return a1, a2, b1 + c * a1, b2 + c * a2

    return Congruence("general", domain=Z.domain, height=Z.height + c, evaluator=evaluator, name=Z.name)


# -- Taylor tables ----------------------------------------------------------------

@dataclass(frozen=True)
class TaylorTable:
    """``b1 = sum b1[k, i] u^(k-i) v^i`` and likewise for ``b2``."""

    b1: dict
    b2: dict

    def __getitem__(self, key):
        j, k, i = key
        table = self.b1 if j == 1 else self.b2
        return table.get((k, i), 0)


def taylor_coefficients(Z: Congruence, u0, v0, order: int = 3) -> TaylorTable:
    jet = eval_jet(Z, u0, v0, order)
    return taylor_table_from_jet(jet)


def taylor_table_from_jet(jet: Jet) -> TaylorTable:
    tables = []
    for name in ("b1", "b2"):
        s = jet.series[name]
        tables.append({(k, i): s.coeff((k - i, i)) for k in range(1, jet.order + 1) for i in range(k + 1)})
    return TaylorTable(*tables)


# -- affine normal forms ------------------------------------------------------------

NON_ELLIPTIC = "non_elliptic"
HYPERBOLIC = "hyperbolic"


@dataclass
class NormalForm:
    """Result of :func:`normalize_at_point`.

    ``A, T`` act on space; ``congruence`` is the transformed congruence in a
    direction chart centred so the chosen point sits at parameter ``(0, 0)``.
    ``to_new`` maps original parameters to new ones, ``to_old`` inverts it.
    """

    A: np.ndarray
    T: np.ndarray
    congruence: Congruence
    to_new: Callable
    to_old: Callable
    mode: str
    focal_index: int
    focal_t: tuple
    identity: bool = False

    def jet(self, order: int = 3) -> Jet:
        return eval_jet(self.congruence, 0, 0, order)


def _direction_jet(Z: Congruence, u0, v0):
    j = eval_jet(Z, u0, v0, 1)
    A = np.array([[j["a1u"], j["a1v"]], [j["a2u"], j["a2v"]]], dtype=float)
    B = np.array([[j["b1u"], j["b1v"]], [j["b2u"], j["b2v"]]], dtype=float)
    return j, A, B


def _kernel_2x2(M: np.ndarray) -> np.ndarray:
    r = M[0] if np.linalg.norm(M[0]) >= np.linalg.norm(M[1]) else M[1]
    if np.linalg.norm(r) == 0:
        raise DegenerateFocalData("every direction is torsal")
    k = np.array([r[1], -r[0]])
    return k / np.linalg.norm(k)


def _focal_plane_covector(a0, A_, B, t) -> np.ndarray:
    """Covector of the plane paired with root ``t`` (chart axis 3)."""
    d = _kernel_2x2(B + t * A_)
    alpha = A_ @ d
    if np.linalg.norm(alpha) < 1e-14 * (1 + np.linalg.norm(B)):
        alpha = B @ d
    c1, c2 = -alpha[1], alpha[0]
    return np.array([c1, c2, -(c1 * a0[0] + c2 * a0[1])])


def _focal_roots(A_, B):
    q2 = np.linalg.det(A_)
    q1 = A_[0, 0] * B[1, 1] + B[0, 0] * A_[1, 1] - A_[0, 1] * B[1, 0] - B[0, 1] * A_[1, 0]
    q0 = np.linalg.det(B)
    return q2, q1, q0


def normalize_at_point(
    Z: Congruence,
    u0,
    v0,
    mode: str = NON_ELLIPTIC,
    focal_index: int = 0,
    focal_t: float | None = None,
    tol: float = 1e-10,
) -> NormalForm:
    """Affine normal form of ``Z`` at ``(u0, v0)``.

    The chosen focal point goes to the origin, the line to the ``x3`` axis
    and its paired focal plane to ``x2 = 0``; in hyperbolic mode the other
    focal point goes to ``-e3`` and its plane to ``x1 = 0``.  Focal points are
    ordered by ascending ``t``; ``focal_index`` picks one, or ``focal_t``
    forces a specific (focal) parameter.
    """
    if mode not in (NON_ELLIPTIC, HYPERBOLIC):
        raise ValueError(f"unknown mode {mode!r}")
    jet, A_, B = _direction_jet(Z, u0, v0)
    if abs(np.linalg.det(A_)) <= 1e-12 * max(1.0, np.abs(A_).max() ** 2):
        raise StallPoint("direction map is singular; no direction chart at this point")
    a0 = np.array([float(x) for x in jet.a])
    b0 = np.array([float(x) for x in jet.b])
    q2, q1, q0 = _focal_roots(A_, B)
    # BDE discriminant, which equals the focal discriminant
    Ab = A_[0, 0] * B[1, 0] - A_[1, 0] * B[0, 0]
    Bb = A_[0, 0] * B[1, 1] + A_[0, 1] * B[1, 0] - A_[1, 0] * B[0, 1] - A_[1, 1] * B[0, 0]
    Cb = A_[0, 1] * B[1, 1] - A_[1, 1] * B[0, 1]
    delta = Bb * Bb - 4 * Ab * Cb
    ptol = 1e-10 * (1 + Bb * Bb + abs(Ab * Cb))
    if delta < -ptol:
        err = NotHyperbolic if mode == HYPERBOLIC else NotNonElliptic
        raise err(f"elliptic point (delta = {delta:.3e})")
    if mode == HYPERBOLIC and delta <= ptol:
        if abs(delta) <= ptol:
            raise DegenerateFocalData("focal points coincide at a parabolic point")
        raise NotHyperbolic(f"point is not hyperbolic (delta = {delta:.3e})")
    if abs(delta) <= ptol:
        roots = [-q1 / (2 * q2)]
    else:
        sq = math.sqrt(delta / (q2 * q2)) * abs(q2)  # = sqrt(q1^2 - 4 q2 q0)
        s = -0.5 * (q1 + math.copysign(sq, q1))
        roots = sorted([s / q2, q0 / s]) if s != 0 else sorted([sq / (2 * q2), -sq / (2 * q2)])
    if focal_t is not None:
        g = q2 * focal_t**2 + q1 * focal_t + q0
        if abs(g) > 1e-8 * (abs(q2) * focal_t**2 + abs(q1 * focal_t) + abs(q0) + 1e-300):
            raise DegenerateFocalData(f"t = {focal_t} is not a focal parameter")
        idx = int(np.argmin([abs(r - focal_t) for r in roots]))
        t1 = float(focal_t)
    else:
        idx = focal_index % len(roots)
        t1 = roots[idx]
    c = _focal_plane_covector(a0, A_, B, t1)
    k = 2
    if mode == HYPERBOLIC:
        t2 = roots[1 - idx]
        c_other = _focal_plane_covector(a0, A_, B, t2)
        kappa = 1.0 / (t1 - t2)
        r1 = c_other
    else:
        kappa = 1.0
        best = None
        for i in (0, 1):
            e = np.zeros(3)
            e[i] = 1.0
            cand = e - (a0[i] / a0[k]) * np.eye(3)[k]
            score = np.linalg.norm(np.cross(cand, c))
            if best is None or score > best[0]:
                best = (score, cand)
        r1 = best[1]
    r3 = np.zeros(3)
    r3[k] = kappa / a0[k]
    c = c / np.abs(c).max()
    A = np.vstack([r1, c, r3])
    p = b0 + t1 * a0
    T = -A @ p
    if np.allclose(A, np.eye(3), atol=1e-15, rtol=0) and np.allclose(T, 0, atol=1e-15) and u0 == 0 and v0 == 0:
        ident = lambda u, v: (u, v)  # noqa: E731
        return NormalForm(np.eye(3), np.zeros(3), Z if Z.chart == "b" else _as_bchart(Z), ident, ident, mode, idx, tuple(roots), True)
    return _build_normal_form(Z, u0, v0, A, T, mode, idx, tuple(roots))


def _as_bchart(Z: Congruence) -> Congruence:
    return _reparametrized(Z, np.eye(3), np.zeros(3), 0.0, 0.0)


def _direction_image(A, Z):
    """(u, v) -> chart direction coordinates of ``A a(u, v)``."""

    def phi(u, v):
        a1, a2, _, _ = Z.components(u, v)
        n = [A[i, 0] * a1 + A[i, 1] * a2 + A[i, 2] for i in range(3)]
        inv = 1 / n[2]
        return n[0] * inv, n[1] * inv

    return phi


def _reparametrized(Z, A, T, u0, v0) -> Congruence:
    return _build_normal_form(Z, u0, v0, A, T, NON_ELLIPTIC, 0, ()).congruence


def _build_normal_form(Z, u0, v0, A, T, mode, idx, roots) -> NormalForm:
    A = check_invertible(A)
    phi = _direction_image(A, Z)
    h = Z.height
    z0 = np.array([float(u0), float(v0)])

    def jac(z):
        x, y = Series.variables(z, 1)
        f1, f2 = phi(x, y)
        return np.array([[float(f1.deriv((1, 0))), float(f1.deriv((0, 1)))],
                         [float(f2.deriv((1, 0))), float(f2.deriv((0, 1)))]])

    J0 = jac(z0)
    if abs(np.linalg.det(J0)) < 1e-12:
        raise StallPoint("transformed direction map is singular")
    w0 = np.array([float(x) for x in phi(z0[0], z0[1])])

    def to_new(u, v):
        x1, x2 = phi(u, v)
        return x1 - w0[0], x2 - w0[1]

    def invert_float(target: np.ndarray) -> np.ndarray:
        z = z0.copy()
        for _ in range(60):
            f = np.array([float(x) for x in phi(z[0], z[1])]) - target
            if np.linalg.norm(f) < 1e-15 * (1 + np.linalg.norm(target)):
                break
            J = jac(z)
            dz = np.linalg.solve(J, -f)
            z = z + dz
            if np.linalg.norm(dz) < 1e-16 * (1 + np.linalg.norm(z)):
                break
        return z

    def to_old(up, vp):
        """Inverse of ``to_new``; accepts numbers or series."""
        cu, cv = float(constant_of(up)), float(constant_of(vp))
        zc = invert_float(np.array([cu + w0[0], cv + w0[1]]))
        if not isinstance(up, Series) and not isinstance(vp, Series):
            return zc[0], zc[1]
        ref = up if isinstance(up, Series) else vp
        n, order = ref.nvars, ref.order
        Jinv = np.linalg.inv(jac(zc))
        du = Series.constant(0.0, n, order)
        dv = Series.constant(0.0, n, order)
        for _ in range(order + 1):
            f1, f2 = phi(zc[0] + du, zc[1] + dv)
            r1 = up + w0[0] - f1
            r2 = vp + w0[1] - f2
            du = du + (r1 * Jinv[0, 0] + r2 * Jinv[0, 1])
            dv = dv + (r1 * Jinv[1, 0] + r2 * Jinv[1, 1])
        return zc[0] + du, zc[1] + dv

    def evaluator(up, vp):
        u, v = to_old(up, vp)
        a1, a2, b1, b2 = Z.components(u, v)
        a = (a1, a2, 1)
        b = (b1, b2, h)
        na = [A[i, 0] * a[0] + A[i, 1] * a[1] + A[i, 2] * a[2] for i in range(3)]
        nb = [A[i, 0] * b[0] + A[i, 1] * b[1] + A[i, 2] * b[2] + T[i] for i in range(3)]
        inv = 1 / na[2]
        a1n, a2n = na[0] * inv, na[1] * inv
        return up + w0[0], vp + w0[1], nb[0] - nb[2] * a1n, nb[1] - nb[2] * a2n

    newZ = Congruence("general", evaluator=evaluator, name=Z.name)
    if not np.any(w0):
        newZ.chart = "b"
    return NormalForm(A, np.asarray(T, dtype=float), newZ, to_new, to_old, mode, idx, roots)


def reparametrize(Z: Congruence, u0, v0, A, T) -> NormalForm:
    """Transform ``Z`` by ``x -> A x + T`` and recentre the direction chart at ``(u0, v0)``."""
    return _build_normal_form(Z, u0, v0, np.asarray(A, dtype=float), np.asarray(T, dtype=float), NON_ELLIPTIC, 0, ())
