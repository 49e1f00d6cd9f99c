import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscreduce.fock import WeightVector, enumerate_basis
from oscreduce.symbols import PolySymbol, parse_symbol
from oscreduce.verify import _entrywise_relative, random_symbol
from oscreduce.wick import commutator_norm_scan, lambda_toeplitz, normal_ordered_matrix, toeplitz_matrix

CASES = [((1, 1), 6), ((1, 2), 9), ((2, 3), 13), ((2, 4, 3), 12), ((1, 1, 1), 4)]


def test_toeplitz_examples():
    b = enumerate_basis((1, 1), 1)
    f = parse_symbol("zb(1)*z(2)", 2)
    expected = np.array([[0, 0], [1, 0]])
    np.testing.assert_allclose(toeplitz_matrix(f, b).entries, expected, atol=1e-15)
    np.testing.assert_allclose(normal_ordered_matrix(f, b).entries, expected, atol=1e-15)
    one = PolySymbol.constant(2)
    b5 = enumerate_basis((1, 2), 5)
    np.testing.assert_allclose(toeplitz_matrix(one, b5).entries, np.eye(b5.dim))
    np.testing.assert_allclose(normal_ordered_matrix(one, b5).entries, np.eye(b5.dim))


def test_action_symbol_diagonal():
    b = enumerate_basis((1, 2), 8)
    t = toeplitz_matrix(parse_symbol("s(1)", 2), b).entries
    np.testing.assert_allclose(np.diag(t).real, [(a[0] + 1) / 8 for a in b.indices], rtol=1e-15)
    assert np.count_nonzero(t - np.diag(np.diag(t))) == 0


def test_lambda_toeplitz_examples():
    b = enumerate_basis((1, 1), 3)
    assert not np.any(lambda_toeplitz(parse_symbol("z(1)", 2), b).entries)
    s1 = parse_symbol("s(1)", 2)
    np.testing.assert_array_equal(lambda_toeplitz(s1, b).entries, toeplitz_matrix(s1, b).entries)
    b12 = enumerate_basis((1, 2), 7)
    f = parse_symbol("zb(1)*z(2) + s(2)", 2)
    np.testing.assert_array_equal(lambda_toeplitz(f, b12).entries, toeplitz_matrix(parse_symbol("s(2)", 2), b12).entries)
    np.testing.assert_array_equal(toeplitz_matrix(f, b12).entries, toeplitz_matrix(parse_symbol("s(2)", 2), b12).entries)


def test_kinv_terms_scale_with_k():
    b = enumerate_basis((1, 2), 10)
    t = toeplitz_matrix(parse_symbol("kinv*s(1)", 2), b).entries
    np.testing.assert_allclose(t, toeplitz_matrix(parse_symbol("s(1)", 2), b).entries / 10)


def test_commutator_examples():
    s1, s2 = parse_symbol("s(1)", 2), parse_symbol("s(2)", 2)
    assert all(v == 0 for v in commutator_norm_scan(s1, s1, (1, 2), [4, 8]).norms)
    assert all(v == 0 for v in commutator_norm_scan(s1, s2, (1, 2), [4, 8]).norms)
    g = parse_symbol("zb(1)^2*z(2) + zb(2)*z(1)^2", 2)
    assert commutator_norm_scan(s1, g, (1, 2), range(8, 65)).slope <= -0.85
    with pytest.raises(ValueError):
        commutator_norm_scan(s1, parse_symbol("z(1)", 2), (1, 2), [4])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(CASES))
def test_wick_equals_normal_order(seed, case):
    p, k = case
    rng = np.random.default_rng(seed)
    w = WeightVector(p)
    f = random_symbol(rng, w)
    b = enumerate_basis(w, k)
    a = toeplitz_matrix(f, b).entries
    c = normal_ordered_matrix(f, b).entries
    assert np.array_equal(a == 0, c == 0)
    assert _entrywise_relative(a, c) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(CASES))
def test_adjoint_gives_conjugate_transpose(seed, case):
    p, k = case
    rng = np.random.default_rng(seed)
    f = random_symbol(rng, WeightVector(p))
    b = enumerate_basis(p, k)
    np.testing.assert_allclose(toeplitz_matrix(f.adjoint(), b).entries, toeplitz_matrix(f, b).entries.conj().T,
                               atol=1e-13)
    assert toeplitz_matrix(f + f.adjoint(), b).is_hermitian()


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(CASES), st.tuples(st.integers(0, 3), st.integers(0, 3)), st.tuples(st.integers(0, 3), st.integers(0, 3)))
def test_charged_terms_vanish(case, g2, d2):
    p, k = case
    n = len(p)
    gamma, delta = (g2 + (0,) * n)[:n], (d2 + (0,) * n)[:n]
    w = WeightVector(p)
    if w.degree(gamma) == w.degree(delta):
        return
    b = enumerate_basis(p, k)
    assert not np.any(toeplitz_matrix(PolySymbol.monomial(gamma, delta), b).entries)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CASES), st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.floats(0.0, 5.0)),
                                       min_size=1, max_size=4))
def test_positive_action_symbols_give_psd(case, raw):
    p, k = case
    n = len(p)
    terms = {}
    for a, b_, c in raw:
        e = tuple(((a, b_) + (0,) * n)[:n])
        terms[(e, e, 0)] = terms.get((e, e, 0), 0) + c
    f = PolySymbol(n, terms)
    t = toeplitz_matrix(f, enumerate_basis(p, k)).entries
    assert np.linalg.eigvalsh(t).min() >= -1e-12
