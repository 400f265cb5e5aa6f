import numpy as np
import pytest
from hypothesis import given, strategies as st

from linecong.bde import (
    StopReason,
    branches_from_bde,
    build_developable,
    developability_residual,
    direction_residual,
    find_folded_singularities,
    integrate_torsal_curve,
    tangency_function,
    torsal_branches,
)
from linecong.errors import EllipticSeed
from linecong.congruence import Congruence, Poly, eval_jet
from linecong.invariants import BDECoefficients
from linecong.surfaces import delta_value, trace_parabolic_curve

from conftest import U, V


def test_linear_branches(linear):
    br = torsal_branches(eval_jet(linear, 0.3, -0.2, 1))
    assert len(br) == 2
    dirs = sorted(tuple(np.round(np.abs(b.direction), 12)) for b in br)
    s = np.round(np.sqrt(0.5), 12)
    assert dirs == [(s, s), (s, s)]
    assert abs(float(br[0].direction @ br[1].direction)) < 1e-12


def test_branch_ordering_and_special_cases():
    # du^2 - dv^2: roots du/dv = -1, +1 in ascending order
    br = branches_from_bde(BDECoefficients(1.0, 0.0, -1.0))
    # directions are sign-normalized to a non-negative first entry
    np.testing.assert_allclose(br[0].direction, np.array([1, -1]) / np.sqrt(2))
    np.testing.assert_allclose(br[1].direction, np.array([1, 1]) / np.sqrt(2))
    # only the mixed term: the coordinate axes, dv/du = 0 before du/dv = 0
    br = branches_from_bde(BDECoefficients(0.0, 3.0, 0.0))
    np.testing.assert_allclose([b.direction for b in br], [[0, 1], [1, 0]])
    assert branches_from_bde(BDECoefficients(1.0, 0.0, 1.0)) == []
    (d,) = branches_from_bde(BDECoefficients(1.0, 2.0, 1.0))
    assert d.double
    np.testing.assert_allclose(abs(d.direction), np.array([1, 1]) / np.sqrt(2))
    assert branches_from_bde(BDECoefficients(0.0, 0.0, 0.0)) == []


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_branches_solve_the_quadratic(A, B, C):
    bde = BDECoefficients(A, B, C)
    slack = 1e-12 * (1 + abs(A) + abs(B) + abs(C))
    for b in branches_from_bde(bde):
        du, dv = b.direction
        if b.double:
            # a near-zero discriminant is snapped to a double root
            slack += abs(B * B - 4 * A * C) / (4 * max(abs(A), abs(C), 1e-300))
        assert abs(bde.evaluate(du, dv)) <= slack


def test_separable_congruence_has_coordinate_torsals():
    """b = (f(u), g(v)): det(a, da, db) = du dv (g' - f'), so torsals are coordinate lines."""
    Z = Congruence.bchart(Poly({(3, 0): 1}), V * 2, domain=(-0.5, 0.5, -0.5, 0.5))
    for branch in (0, 1):
        c = integrate_torsal_curve(Z, (0.1, 0.2), branch)
        spread = np.ptp(c.points, axis=0)
        assert min(spread) < 1e-12 and max(spread) > 0.29
        assert c.reason is StopReason.DOMAIN_BOUNDARY


@pytest.mark.parametrize("branch", [0, 1])
@pytest.mark.parametrize("reverse", [False, True])
def test_linear_torsals_are_diagonals(linear, branch, reverse):
    seed = (0.2, -0.1)
    c = integrate_torsal_curve(linear, seed, branch, reverse=reverse)
    u, v = c.points.T
    s = np.sign(u[-1] - u[0]) * np.sign(v[-1] - v[0])
    off = v - s * u
    assert np.max(np.abs(off - (seed[1] - s * seed[0]))) < 1e-8
    assert c.reason is StopReason.DOMAIN_BOUNDARY
    # ends on the boundary of [-1, 1]^2
    assert abs(np.max(np.abs(c.points[-1])) - 1) < 1e-6


def test_reverse_goes_the_other_way(fig1):
    a = integrate_torsal_curve(fig1, (0.3, 0.4), 0)
    b = integrate_torsal_curve(fig1, (0.3, 0.4), 0, reverse=True)
    np.testing.assert_array_equal(a.points[0], b.points[0])
    assert float((a.points[1] - a.points[0]) @ (b.points[1] - b.points[0])) < 0


def test_fig1_torsal_accuracy(fig1):
    c = integrate_torsal_curve(fig1, (0.3, 0.4), 1)
    assert len(c) > 10
    for p, d in zip(c.points, c.directions):
        assert abs(direction_residual(fig1, p, d)) < 1e-7
    mid, tan = c.hermite_midpoints()
    for p, d in zip(mid, tan):
        assert abs(developability_residual(fig1, p, d)) < 1e-6


def test_cusped_torsals_stop_at_parabolic_line():
    """b1 = v, b2 = u^2: torsal equation 2u du^2 - dv^2 = 0, parabolic along u = 0.

    The torsals are v = c +- (2 sqrt 2 / 3) u^(3/2); followed towards u = 0 they stop there.
    """
    Z = Congruence.bchart(V, U * U, domain=(-1, 1, -1, 1))
    seed = (0.5, 0.1)
    for branch in (0, 1):
        for reverse in (False, True):
            c = integrate_torsal_curve(Z, seed, branch, reverse=reverse)
            u, v = c.points.T
            k = 2 * np.sqrt(2) / 3
            exact = [np.max(np.abs(v - seed[1] - s * k * (u ** 1.5 - seed[0] ** 1.5))) for s in (1, -1)]
            assert min(exact) < 1e-8
            if u[-1] < seed[0]:
                assert c.reason is StopReason.PARABOLIC_CURVE
                assert u[-1] < 1e-3
            else:
                assert c.reason is StopReason.DOMAIN_BOUNDARY


def test_elliptic_seed_is_rejected(fig1):
    for u in np.linspace(-0.9, 0.9, 19):
        for v in np.linspace(-0.9, 0.9, 19):
            if delta_value(fig1, u, v)[0] < -1e-3:
                with pytest.raises(EllipticSeed):
                    integrate_torsal_curve(fig1, (u, v), 0)
                return
    pytest.fail("no elliptic point found")


def test_developable_mesh_is_ruled_by_congruence_lines(linear):
    c = integrate_torsal_curve(linear, (0.0, 0.1), 0)
    mesh = build_developable(linear, c, (-1.0, 1.0), nt=5)
    assert len(mesh.vertices) == 5 * len(c)
    for i in range(0, len(c), 7):
        a1, a2, b1, b2 = linear.components(*c.points[i])
        for x in mesh.vertices[5 * i: 5 * i + 5]:
            t = x[2]
            np.testing.assert_allclose(x, [b1 + t * a1, b2 + t * a2, t], atol=1e-14)
    # consecutive rulings are coplanar for a developable
    for i in range(len(c) - 1):
        p = mesh.vertices[5 * i: 5 * i + 5]
        q = mesh.vertices[5 * i + 5: 5 * i + 10]
        M = np.array([p[-1] - p[0], q[-1] - q[0], q[0] - p[0]])
        assert abs(np.linalg.det(M)) < 1e-12


def test_folded_example_is_nonisolated(folded):
    # the double direction (4, -u) is tangent to v = -u^2/8 everywhere, so every traced
    # vertex is reported; an odd grid puts a node, and hence a vertex, at the origin
    for res in (40, 41):
        curves = trace_parabolic_curve(folded, resolution=res)
        found = find_folded_singularities(folded, curves)
        assert found and not any(f.isolated for f in found)
        for f in found:
            assert abs(f.point[1] + f.point[0] ** 2 / 8) < 1e-8
    assert min(np.linalg.norm(f.point) for f in found) < 1e-12


def _tangency_oracle(Z, u, v, h=1e-6):
    """Double direction against a finite-difference gradient of the discriminant."""
    gu = (delta_value(Z, u + h, v)[0] - delta_value(Z, u - h, v)[0]) / (2 * h)
    gv = (delta_value(Z, u, v + h)[0] - delta_value(Z, u, v - h)[0]) / (2 * h)
    (d,) = torsal_branches(eval_jet(Z, u, v, 1)) or [None]
    g = np.array([gu, gv])
    return abs(float(d.direction @ g)) / np.linalg.norm(g)


def test_fig1_folded_singularities(fig1):
    curves = trace_parabolic_curve(fig1, resolution=64)
    found = find_folded_singularities(fig1, curves)
    assert found and all(f.isolated for f in found)
    for f in found:
        d, scale = delta_value(fig1, *f.point)
        assert abs(d) < 1e-8 * scale
        assert _tangency_oracle(fig1, *f.point) < 1e-5
    assert min(np.linalg.norm(f.point) for f in found) > 0.01


def test_tangency_function_vanishes_identically_on_folded_example(folded):
    for u in (-0.5, 0.0, 0.3):
        psi, _, delta, _, rel = tangency_function(folded, u, -u * u / 8)
        assert abs(delta) < 1e-12 and abs(rel) < 1e-12


def _distance_to_hermite_curve(c, q, samples=2000):
    """Distance from q to the cubic Hermite interpolant of a torsal curve (tangent-line corrected)."""
    p, d = c.points, c.directions
    x = np.linspace(0, 1, samples)[:, None]
    best = np.inf
    near = np.argsort([np.linalg.norm((p[i] + p[i + 1]) / 2 - q) for i in range(len(p) - 1)])[:3]
    for i in near:
        h = np.linalg.norm(p[i + 1] - p[i])
        H = ((2 * x**3 - 3 * x**2 + 1) * p[i] + (x**3 - 2 * x**2 + x) * h * d[i]
             + (-2 * x**3 + 3 * x**2) * p[i + 1] + (x**3 - x**2) * h * d[i + 1])
        dH = ((6 * x**2 - 6 * x) * p[i] + (3 * x**2 - 4 * x + 1) * h * d[i]
              + (-6 * x**2 + 6 * x) * p[i + 1] + (3 * x**2 - 2 * x) * h * d[i + 1])
        k = np.argmin(np.linalg.norm(H - q, axis=1))
        t, r = dH[k] / np.linalg.norm(dH[k]), q - H[k]
        best = min(best, abs(r[0] * t[1] - r[1] * t[0]))
    return best


@pytest.mark.parametrize("seed", [(0.3, 0.4), (-0.5, -0.6), (0.6, -0.3)])
@pytest.mark.parametrize("branch", [0, 1])
def test_branch_lifting_retraces_the_curve(fig1, seed, branch):
    """Integrate, then integrate back from the far end: the return curve passes through every
    point of the first one, so the root matching never jumped to the other branch."""
    c = integrate_torsal_curve(fig1, seed, branch)
    end, d_end = c.points[-2], c.directions[-2]
    br = torsal_branches(eval_jet(fig1, *end, 1))
    k = max(range(len(br)), key=lambda i: abs(float(br[i].direction @ d_end)))
    back = integrate_torsal_curve(fig1, tuple(end), k, reverse=bool(br[k].direction @ d_end > 0))
    assert max(_distance_to_hermite_curve(back, q) for q in c.points[:-1]) < 1e-7


def test_folded_singularities_do_not_depend_on_resolution(fig1):
    ref = None
    for res in (32, 48, 64, 65, 101):
        pts = sorted(tuple(np.round(f.point, 8)) for f in
                     find_folded_singularities(fig1, trace_parabolic_curve(fig1, resolution=res)) if f.isolated)
        if ref is None:
            ref = pts
        assert pts == ref
    assert len(ref) == 5
