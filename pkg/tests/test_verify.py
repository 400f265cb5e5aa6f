import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from linecong.congruence import Congruence, eval_jet
from linecong.invariants import PointKind, focal_data
from linecong.surfaces import middle_surface_jacobian
from linecong.verify import (
    compare_with_focal_data,
    fd_jet_oracle,
    jacobian_determinant_identity,
    jet_residual,
    middle_jacobian_fd,
    middle_reality_property,
    quadric_intersection_oracle,
    random_bchart,
    rank_oracle,
    run_suite,
)

from conftest import random_poly


def test_fd_jet_matches_series(fig1):
    j, o = eval_jet(fig1, 0.3, -0.4, 1), fd_jet_oracle(fig1, 0.3, -0.4)
    for k in ("b1u", "b1v", "b2u", "b2v", "a1u", "a2v"):
        assert float(o[k]) == pytest.approx(float(j[k]), abs=1e-7)
    assert jet_residual(fig1, 0.3, -0.4) < 1e-6


def test_determinant_identity_random():
    rng = np.random.default_rng(1)
    for _ in range(5):
        Z = random_bchart(rng, 3)
        samples = rng.uniform(-1, 1, (50, 3))
        assert jacobian_determinant_identity(Z, samples) < 1e-6


def test_quadric_oracle_linear(linear):
    o = quadric_intersection_oracle(linear, (0, 0))
    assert o.kind == "hyperbolic"
    assert o.ts == pytest.approx([-1, 1], abs=1e-14)
    for d in o.directions:
        assert abs(abs(d[0]) - abs(d[1])) < 1e-14


def test_quadric_oracle_classes(fig1, rotational):
    assert quadric_intersection_oracle(fig1, (0, 0)).kind == "parabolic"
    assert quadric_intersection_oracle(rotational, (0, 0)).kind == "elliptic"


@settings(max_examples=80)
@given(st.integers(0, 2**31))
def test_oracle_agrees_with_focal_data(seed):
    rng = np.random.default_rng(seed)
    Z = Congruence.bchart(random_poly(rng), random_poly(rng))
    z = tuple(rng.uniform(-1, 1, 2))
    ok, worst = compare_with_focal_data(Z, z)
    assert ok, worst


def test_oracle_on_parabolic_points(fig1, folded):
    assert compare_with_focal_data(fig1, (0, 0))[0]
    assert compare_with_focal_data(folded, (0.4, -0.02))[0]
    assert focal_data(eval_jet(folded, 0.4, -0.02)).kind is PointKind.PARABOLIC


def test_middle_reality_small():
    r = middle_reality_property(100, 3, seed=7)
    assert r.passed and r.trials == 100 and r.max_imag < 1e-12


def test_rank_oracle():
    assert rank_oracle(np.eye(3)) == 3
    assert rank_oracle([[1, 2], [2, 4]]) == 1
    assert rank_oracle(np.zeros((2, 2))) == 0
    assert rank_oracle(lambda u, v: [[u, v], [v, u]], (1.0, 1.0)) == 1


def test_middle_jacobian_fd_agrees(fig1):
    for z in ((0.0, 0.0), (0.3, -0.2)):
        A = middle_surface_jacobian(fig1, *z)
        B = middle_jacobian_fd(fig1, *z)
        np.testing.assert_allclose(A, B, atol=1e-4)
    assert rank_oracle(middle_jacobian_fd(fig1, 0, 0), rel_tol=1e-4) == 1


def test_run_suite_fig1(fig1):
    r = run_suite(fig1, samples=40, seed=3)
    assert r.passed
    assert set(r.checks) == {"jet", "determinant", "quadric", "middle_reality", "stall_rank"}
