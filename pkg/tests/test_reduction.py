import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscreduce import reduction
from oscreduce.fock import enumerate_basis
from oscreduce.symbols import PolySymbol, ReducedPoint, parse_symbol
from oscreduce.wick import lambda_toeplitz

CAL = reduction.calibrate().value


def test_weighted_moment_examples():
    assert reduction.weighted_moment((0, 0), (1, 1)) == pytest.approx(1.0)
    assert reduction.weighted_moment((0, 0), (1, 2)) == pytest.approx(0.5)
    assert reduction.weighted_moment((1, 0), (1, 1)) == pytest.approx(0.5)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(1, 2), (2, 3), (1, 1, 1), (2, 4, 3), (1, 2, 3)]), st.lists(st.integers(0, 4), min_size=3, max_size=3))
def test_leray_invariance(p, a):
    a = tuple(a[:len(p)])
    exact = reduction.weighted_moment(a, p)
    for j in range(len(p)):
        assert reduction.SimplexDomain(p, j).moment(a) == pytest.approx(exact, rel=1e-12)


def test_calibration_is_stirling_limit():
    res = reduction.calibrate()
    assert res.value == pytest.approx(math.sqrt(2) / (2 * math.pi), rel=1e-12)
    assert res.error < 1e-10


def test_reduced_norm_closed_forms():
    for k in (3, 10, 25):
        expected = math.sqrt(2 * math.pi / k) * math.exp(-k)
        assert reduction.reduced_norm_sq((k,), (1,), k) == pytest.approx(expected, rel=1e-12)
    expected = (2 * math.pi) ** 1.5 * math.exp(-1) / 2
    assert reduction.reduced_norm_sq((1, 0), (1, 1), 1) == pytest.approx(expected, rel=1e-10)


def test_n1_maps_and_unitary_part():
    maps = reduction.build_reduction_maps(enumerate_basis((1,), 5))
    np.testing.assert_allclose(maps.U, [[1.0]])
    b = enumerate_basis((2, 3), 17)
    maps = reduction.build_reduction_maps(b)
    np.testing.assert_allclose(maps.U, np.eye(b.dim), atol=1e-14)
    np.testing.assert_allclose(maps.V @ maps.W, np.eye(b.dim), atol=1e-14)
    np.testing.assert_allclose(maps.W @ maps.V, np.eye(b.dim), atol=1e-14)
    t = lambda_toeplitz(parse_symbol("s(1) + zb(1)^3*z(2)^2 + zb(2)^2*z(1)^3", 2), b).entries
    np.testing.assert_allclose(maps.conjugate(t), t, atol=1e-14)


def test_vstar_v_law_n1_and_equal_weights():
    devs = [reduction.vstar_v_symbol_check(enumerate_basis((1,), k)).max_deviation for k in (10, 20, 40)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 3e-3
    d2 = reduction.build_reduction_maps(enumerate_basis((1, 1, 1), 9)).vstar_v
    assert np.ptp(d2) <= 1e-9 * d2.max()


def test_phi_properties():
    y = ReducedPoint.on_level_set((0.2, 0.4), (1, 2))
    assert reduction.phi(0.0, y, (1, 2)) == 0.0
    ts = np.linspace(-1, 1, 21)
    values = reduction.phi(ts, y, (1, 2))
    assert np.all(values >= 0)
    h = 1e-4
    second = (reduction.phi(0.3 + h, y, (1, 2)) - 2 * reduction.phi(0.3, y, (1, 2)) + reduction.phi(0.3 - h, y, (1, 2))) / h ** 2
    assert second == pytest.approx(reduction.phi_dt2(0.3, y, (1, 2)), rel=1e-5)


def test_control_norm_examples():
    y = ReducedPoint.on_level_set((0.5, 0.25), (1, 2))
    assert reduction.control_norm_check((2, 1), (1, 2), 4, 0.0, y) == 0.0
    for t in (-2.0, -0.7, 0.3, 2.0):
        assert reduction.control_norm_check((9,), (1,), 9, t, ReducedPoint.on_level_set((1.0,), (1,))) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([(1, 2), (2, 3)]), st.integers(5, 40), st.floats(-2, 2), st.floats(0.01, 0.99),
       st.floats(0, 2 * math.pi), st.integers(0, 1000))
def test_control_norm_random(p, k, t, u, angle, pick):
    basis = enumerate_basis(p, k)
    if not basis.dim:
        return
    alpha = basis.indices[pick % basis.dim]
    y = ReducedPoint.on_level_set((u / p[0], (1 - u) / p[1]), p, (angle,))
    assert reduction.control_norm_check(alpha, p, k, t, y) <= 1e-10


def test_ik_exact_for_n1():
    for k in (5, 12, 30):
        exact = math.sqrt(k / (2 * math.pi)) * 2 * math.pi * math.exp(k + math.lgamma(k + 1) - (k + 1) * math.log(k))
        value = reduction.integrate_Ik(PolySymbol.constant(1), ReducedPoint((1.0,)), (1,), k, CAL)
        assert value == pytest.approx(exact, rel=1e-10)


def test_ik_leading_law():
    s = (0.3, 0.35)
    vals = [reduction.integrate_Ik(PolySymbol.constant(2), ReducedPoint.on_level_set(s, (1, 2)), (1, 2), k, CAL)
            for k in (20, 40, 80)]
    r1, r2 = 2 * vals[1] - vals[0], 2 * vals[2] - vals[1]
    assert (4 * r2 - r1) / 3 == pytest.approx(reduction.ik_leading(s, (1, 2), CAL), rel=1e-4)


def test_pres_identity_with_bump_and_off_diagonal():
    from oscreduce.verify import bump_symbol
    bump = bump_symbol(reduction.as_weights((1, 2)))
    for alpha in enumerate_basis((1, 2), 10).indices:
        assert reduction.pres_identity_check(bump, alpha, alpha, (1, 2), 10, CAL).relative_error <= 1e-6
    off = reduction.pres_identity_check(bump, (10, 0), (8, 1), (1, 2), 10, CAL)
    assert off.lhs == 0.0 and off.rhs == 0.0


def test_concentration_bound_and_monotonic_in_epsilon():
    assert reduction.concentration_bound((1, 2), 0.3) == pytest.approx(0.14881, abs=1e-5)
    ratios = [reduction.concentration_scan((1, 2), [20], eps, seed=0).ratios[0] for eps in (0.1, 0.3, 0.6)]
    assert ratios[0] > ratios[1] > ratios[2] > 0
    with pytest.raises(ValueError):
        reduction.concentration_scan((1, 2), [20], 1.5)


def test_concentration_is_deterministic():
    a = reduction.concentration_scan((1, 2), [10, 20], 0.3, seed=4)
    b = reduction.concentration_scan((1, 2), [10, 20], 0.3, seed=4)
    assert a.ratios == b.ratios
