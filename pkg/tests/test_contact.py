import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from linecong.congruence import Congruence, eval_jet
from linecong.contact import (
    ContactType,
    DirectionMapKind,
    Model,
    classify_direction_map,
    classify_function_germ,
    classify_map_germ,
    contact_line_incidence,
    contact_line_self,
    contact_parallel_planes,
    contact_pencil,
    contact_with_plane_family,
    contact_with_point_family,
    direction_map_kind,
    incidence_function,
)
from linecong.errors import EqualLines, NotContained, NotIncident
from linecong.invariants import PointKind, classify_point, focal_data
from linecong.linespace import canonicalize_line, canonicalize_plane
from linecong.series import Series

from conftest import U, V, random_poly

X2 = canonicalize_plane([0, 1, 0], 0)
ORDER = 8


def germ(terms):
    return Series({k: float(c) for k, c in terms.items()}, 2, ORDER)


# -- germ classifier ------------------------------------------------------------------------

@pytest.mark.parametrize("terms, expected, k", [
    ({(1, 0): 1}, ContactType.A0, 0),
    ({(2, 0): 1, (0, 2): 1}, ContactType.A1, 1),
    ({(2, 0): 1, (0, 2): -3}, ContactType.A1, 1),
    ({(2, 0): 1, (0, 3): 1}, ContactType.A2, 2),
    ({(2, 0): 1, (0, 4): -1}, ContactType.A3, 3),
    ({(2, 0): 1, (0, 6): 1}, ContactType.AK_HIGHER, 5),
    ({(3, 0): 1, (0, 3): 1}, ContactType.D4, None),
    ({(3, 0): 1, (1, 2): -3}, ContactType.D4, None),
    ({(2, 1): 1}, ContactType.DEGENERATE, None),
    ({(2, 0): 1}, ContactType.DEGENERATE, None),
])
def test_function_germs(terms, expected, k):
    g = classify_function_germ(germ(terms))
    assert g.type is expected
    if k is not None:
        assert g.k == k


def test_function_germ_needs_rotation_and_elimination():
    # (x + y)^2 + x^3 has a rotated kernel; after eliminating, the order-3 term survives
    x, y = sp.symbols("x y")
    poly = sp.Poly(sp.expand((x + y) ** 2 + x**3 + x * y**3), x, y)
    g = classify_function_germ(germ(dict(poly.terms())))
    assert g.type is ContactType.A2
    # (x + y)^2 + (x - y)^4 is an A3
    poly = sp.Poly(sp.expand((x + y) ** 2 + (x - y) ** 4), x, y)
    assert classify_function_germ(germ(dict(poly.terms()))).type is ContactType.A3


@pytest.mark.parametrize("comps, expected", [
    ([{(1, 0): 1}, {(0, 1): 1}], ContactType.A0),
    ([{(1, 0): 1}, {(0, 2): 1}], ContactType.A1),
    ([{(1, 0): 1}, {(0, 3): 1}, {(0, 4): 1}], ContactType.A2),
    ([{(0, 1): 1, (2, 0): 1}, {(1, 0): 1, (0, 1): 1}], ContactType.A0),
    ([{(2, 0): 1}, {(0, 2): 1}], ContactType.DEGENERATE),
    ([{(1, 0): 1}, {}], ContactType.DEGENERATE),
])
def test_map_germs(comps, expected):
    assert classify_map_germ([germ(c) for c in comps]).type is expected


def test_contact_type_helpers():
    assert ContactType.from_k(0) is ContactType.A0
    assert ContactType.from_k(3) is ContactType.A3
    assert ContactType.from_k(7) is ContactType.AK_HIGHER
    assert not ContactType.A0.singular and ContactType.A1.singular and ContactType.D4.singular


# -- model families -------------------------------------------------------------------------

def test_point_family_examples(fig1, linear):
    r = contact_with_point_family(fig1, (0, 0), (0, 0, 0))
    assert r.model is Model.POINT and r.type is ContactType.A1
    assert r.witness["singular_expr"] == 0 and r.witness["a2_expr"] == 28
    assert contact_with_point_family(linear, (0, 0), (0, 0, 0.5)).type is ContactType.A0
    with pytest.raises(NotIncident):
        contact_with_point_family(linear, (0, 0), (1, 0, 0))


def test_point_family_linear_congruence_is_degenerate(linear):
    """Every line with u + v = 0 passes through (0,0,1), so the contact germ is not isolated."""
    u, v, t = sp.symbols("u v t")
    # contact map: solve b + t a = p for the first two coordinates at t = 1
    eqs = [v + 1 * u, u + 1 * v]
    assert sp.Matrix(eqs).jacobian([u, v]).rank() == 1
    assert sp.simplify(eqs[0] - eqs[1]) == 0
    r = contact_with_point_family(linear, (0, 0), (0, 0, 1))
    assert r.type is ContactType.DEGENERATE and r.witness["a2_expr"] == 0


def test_plane_family_examples(fig1, linear):
    r = contact_with_plane_family(fig1, (0, 0), X2)
    assert r.type is ContactType.A1 and r.witness["b2u"] == 0 and r.witness["b2uu"] == 14
    assert contact_with_plane_family(linear, (0, 0), X2).type is ContactType.A0
    cubic = Congruence.bchart(V, U * U * U)
    r = contact_with_plane_family(cubic, (0, 0), X2)
    assert r.type is ContactType.A2 and r.witness["b2uuu"] == 6
    with pytest.raises(NotContained):
        contact_with_plane_family(linear, (0, 0), canonicalize_plane([0, 0, 1], 0))


def test_direction_map_examples(fig1):
    assert classify_direction_map(fig1, (0.2, 0.1)).type is ContactType.A0
    fold = Congruence.achart(U * U, V)
    kind, _ = direction_map_kind(fold, (0, 0))
    assert kind is DirectionMapKind.FOLD
    assert classify_direction_map(fold, (0, 0)).type is ContactType.A1
    cusp = Congruence.achart(U * U * U + U * V, V)
    assert direction_map_kind(cusp, (0, 0))[0] is DirectionMapKind.CUSP
    assert classify_direction_map(cusp, (0, 0)).type is ContactType.A2
    assert direction_map_kind(cusp, (0.5, 0.1))[0] is DirectionMapKind.REGULAR


def test_direction_map_critical_set_is_stall_set():
    Z = Congruence.achart(U * U * U + U * V, V)
    rng = np.random.default_rng(5)
    for _ in range(20):
        u = rng.uniform(-0.5, 0.5)
        v = -3 * u * u  # critical set of u^3 + uv
        kind, _ = direction_map_kind(Z, (u, v))
        assert kind is not DirectionMapKind.REGULAR
        assert classify_point(eval_jet(Z, u, v, 1)).stall


def test_parallel_planes_examples(fig1):
    assert contact_parallel_planes(fig1, (0, 0.2), (1, 0, 0)).type is ContactType.A0
    r = contact_parallel_planes(Congruence.achart(U * U + V * V, V), (0, 0), (1, 0, 0))
    assert r.type is ContactType.A1 and r.witness["hessian_det"] == pytest.approx(4)
    assert contact_parallel_planes(Congruence.achart(U * U, V), (0, 0), (1, 0, 0)).type is ContactType.DEGENERATE


def test_pencil_examples(fig1, linear, cone):
    assert contact_pencil(linear, (0, 0), (0, 0, 0), X2).type is ContactType.A0
    r = contact_pencil(fig1, (0, 0), (0, 0, 0), X2)
    assert r.type is ContactType.A1 and r.witness["rank"] == 1
    assert contact_pencil(cone, (0, 0), (0, 0, 0), X2).type is ContactType.DEGENERATE


def test_incidence_function_matches_symbolic_determinant(fig1):
    u, v = sp.symbols("u v")
    b1 = sp.sympify("2*v + u**2 + 5*v*u - v**2 - 3*u**3 - v*u**2 + 7*v**2*u + v**3")
    b2 = sp.sympify("7*u**2 - 2*v*u + 3*v**2 + 5*u**3 - 2*v*u**2 + 11*v**2*u + v**3")
    aL, bL = sp.Matrix([1, 2, 0]), sp.Matrix([0, 0, 0])
    F = sp.Matrix.hstack(sp.Matrix([u, v, 1]), aL, sp.Matrix([b1, b2, 0]) - bL).det()
    poly = sp.Poly(sp.expand(F), u, v)
    L = canonicalize_line([1, 2, 0], [0, 0, 0])
    f = incidence_function(fig1, (0, 0), L)
    # the line is stored with a rescaled direction, so F agrees up to a constant factor
    scale = f.coeff((0, 1)) / poly.coeff_monomial(v)
    assert scale != 0
    for (i, j), c in poly.terms():
        assert float(f.coeff((i, j))) == pytest.approx(float(c) * float(scale), abs=1e-12)


def test_line_incidence_linear_examples(linear):
    # through the focal point (0,0,1); symbolically F = 2(u + v) in one focal plane and 0 in the other
    u, v = sp.symbols("u v")
    for direction, expected in (([1, -1, 0], 2 * (u + v)), ([1, 1, 0], 0)):
        F = sp.Matrix.hstack(sp.Matrix([u, v, 1]), sp.Matrix(direction), sp.Matrix([v, u, -1])).det()
        assert sp.expand(F - expected) == 0
    assert contact_line_incidence(linear, (0, 0), canonicalize_line([1, -1, 0], [0, 0, 1])).type is ContactType.A0
    assert contact_line_incidence(linear, (0, 0), canonicalize_line([1, 1, 0], [0, 0, 1])).type is ContactType.DEGENERATE
    assert contact_line_incidence(linear, (0, 0), canonicalize_line([1, 2, 0], [0, 0, 0.5])).type is ContactType.A0
    with pytest.raises(EqualLines):
        contact_line_incidence(linear, (0, 0), canonicalize_line([0, 0, 1], [0, 0, 0]))
    with pytest.raises(NotIncident):
        contact_line_incidence(linear, (0, 0), canonicalize_line([1, 0, 0], [0, 1, 0]))


def test_fig1_has_no_d4_line(fig1):
    rng = np.random.default_rng(11)
    fd = focal_data(eval_jet(fig1, 0, 0))
    (e,) = fd.entries
    for _ in range(20):
        d = rng.normal(size=3)
        d[2] = 0
        r = contact_line_incidence(fig1, (0, 0), canonicalize_line(d, e.point))
        assert r.type is not ContactType.D4


def test_line_self_examples(linear, fig1, folded):
    r = contact_line_self(linear, (0, 0))
    assert r.type is ContactType.A1 and r.witness["morse"]
    r = contact_line_self(fig1, (0, 0))
    assert r.type is ContactType.A2 and not r.witness["morse"] and r.witness["b2uu"] == 14
    r = contact_line_self(folded, (0, 0))
    assert r.witness["rule_type"] == "A3"
    # F = 2 v^2 exactly: every line with v = 0 lies in the plane x2 = 0 and meets L
    assert r.type is ContactType.DEGENERATE


def test_line_self_symbolic_folded(folded):
    u, v = sp.symbols("u v")
    F = sp.Matrix.hstack(sp.Matrix([u, v, 1]), sp.Matrix([0, 0, 1]), sp.Matrix([2 * v + u**2, u * v, 0])).det()
    assert sp.expand(F) == 2 * v**2


def test_report_to_dict_is_json(fig1):
    for r in (contact_with_point_family(fig1, (0, 0), (0, 0, 0)), contact_line_self(fig1, (0, 0)),
              classify_direction_map(Congruence.achart(U * U, V), (0, 0))):
        d = json.loads(json.dumps(r.to_dict()))
        assert d["model"] == r.model.value and d["type"] == r.type.value


# -- cross-module consistency -----------------------------------------------------------------

def _random_hyperbolic(rng):
    while True:
        Z = Congruence.bchart(random_poly(rng), random_poly(rng))
        z = tuple(rng.uniform(-0.5, 0.5, 2))
        fd = focal_data(eval_jet(Z, *z))
        if fd.kind is PointKind.HYPERBOLIC and all(not e.at_infinity for e in fd.entries):
            return Z, z, fd


@settings(max_examples=40)
@given(st.integers(0, 2**31))
def test_point_and_plane_singular_exactly_at_focal_data(seed):
    rng = np.random.default_rng(seed)
    Z, z, fd = _random_hyperbolic(rng)
    for e in fd.entries:
        assert contact_with_point_family(Z, z, e.point).singular
        assert contact_with_plane_family(Z, z, e.plane).singular
    line = canonicalize_line(*(np.array([float(x) for x in w]) for w in (eval_jet(Z, *z).a, eval_jet(Z, *z).b)))
    t = max(e.t for e in fd.entries) + 0.37
    assert not contact_with_point_family(Z, z, line.b + t * line.a / line.a[2]).singular
    n = np.cross(line.a, fd.entries[0].plane.c + fd.entries[1].plane.c)
    generic = canonicalize_plane(np.cross(line.a, n), float(np.cross(line.a, n) @ line.b))
    assert not contact_with_plane_family(Z, z, generic).singular


@settings(max_examples=40)
@given(st.integers(0, 2**31))
def test_line_incidence_singular_on_focal_pencils(seed):
    rng = np.random.default_rng(seed)
    Z, z, fd = _random_hyperbolic(rng)
    e0, e1 = fd.entries
    for p_entry, plane_entry in ((e0, e1), (e1, e0)):
        c = plane_entry.plane.c
        d = np.cross(c, rng.normal(size=3))  # a direction inside the other focal plane
        assert contact_line_incidence(Z, z, canonicalize_line(d, p_entry.point)).singular
        # the same point with a direction inside its own focal plane is a regular contact
        d = np.cross(p_entry.plane.c, rng.normal(size=3))
        assert not contact_line_incidence(Z, z, canonicalize_line(d, p_entry.point)).singular


@settings(max_examples=40)
@given(st.integers(0, 2**31))
def test_line_self_morse_iff_not_parabolic(seed):
    rng = np.random.default_rng(seed)
    Z = Congruence.bchart(random_poly(rng), random_poly(rng))
    z = tuple(rng.uniform(-0.5, 0.5, 2))
    r = contact_line_self(Z, z)
    kind = classify_point(eval_jet(Z, *z, 1)).kind
    assert r.witness["morse"] == (kind is not PointKind.PARABOLIC)
