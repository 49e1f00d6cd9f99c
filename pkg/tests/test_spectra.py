import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from numpy.polynomial import Polynomial

from oscreduce import reduction, spectra
from oscreduce.fock import WeightVector, enumerate_basis
from oscreduce.symbols import parse_symbol
from oscreduce.verify import random_symbol
from oscreduce.wick import lambda_toeplitz


def test_known_spectra_are_exact():
    assert list(spectra.hermitian_eigenvalues(np.eye(4), "jacobi")) == [1.0] * 4
    assert list(spectra.hermitian_eigenvalues(np.array([[0, 1], [1, 0]]), "jacobi")) == [-1.0, 1.0]
    assert list(spectra.hermitian_eigenvalues(np.array([[2, 1j], [-1j, 2]]), "jacobi")) == [1.0, 3.0]
    t = lambda_toeplitz(parse_symbol("s(1)", 2), enumerate_basis((1, 1), 1))
    assert list(spectra.hermitian_eigenvalues(t, "jacobi")) == [1.0, 2.0]


def test_non_hermitian_is_rejected():
    with pytest.raises(spectra.NonHermitianError):
        spectra.hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))


def test_density_sum_examples():
    k = 20
    t = lambda_toeplitz(parse_symbol("s(1)", 2), enumerate_basis((1, 2), k))
    assert spectra.density_sum(t, Polynomial([1.0])) == pytest.approx(t.dim)
    assert spectra.density_sum(t, Polynomial([0.0, 1.0])) == pytest.approx((k / 2 + 1) ** 2 / k, rel=1e-14)
    assert spectra.density_sum(t, Polynomial([0, 0, 1.0])) == pytest.approx(np.linalg.norm(t.entries) ** 2, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(hnp.arrays(np.complex128, (7, 7), elements=st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                                       allow_infinity=False)))
def test_jacobi_matches_reference(a):
    h = a + a.conj().T
    w, v = spectra.hermitian_eigensystem(h, "jacobi")
    ref = np.linalg.eigvalsh(h)
    scale = max(np.linalg.norm(h, 2), 1e-300)
    assert np.max(np.abs(w - ref)) <= 1e-12 * scale
    if scale > 1e-12:
        assert np.max(np.linalg.norm(h @ v - v * w, axis=0)) <= 1e-10 * scale
    np.testing.assert_allclose(v.conj().T @ v, np.eye(7), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([((1, 1), 10), ((1, 2), 16), ((2, 3), 19), ((1, 1, 1), 5)]))
def test_trace_of_powers(seed, case):
    p, k = case
    rng = np.random.default_rng(seed)
    f = random_symbol(rng, WeightVector(p))
    t = lambda_toeplitz(f + f.adjoint(), enumerate_basis(p, k)).entries
    ev = spectra.hermitian_eigenvalues(t)
    power = np.eye(t.shape[0])
    for m in range(1, 5):
        power = power @ t
        tr = np.trace(power).real
        assert np.sum(ev ** m) == pytest.approx(tr, rel=1e-8, abs=1e-10)


def test_conjugation_keeps_spectrum():
    b = enumerate_basis((1, 2), 14)
    t = lambda_toeplitz(parse_symbol("s(1) + zb(1)^2*z(2) + zb(2)*z(1)^2", 2), b).entries
    maps = reduction.build_reduction_maps(b)
    np.testing.assert_array_equal(spectra.hermitian_eigenvalues(maps.conjugate(t), "jacobi"),
                                  spectra.hermitian_eigenvalues(t, "jacobi"))


def test_backends_agree_and_auto_switches():
    b = enumerate_basis((1, 1), 140)
    t = lambda_toeplitz(parse_symbol("s(1) + 0.3*zb(1)*z(2) + 0.3*zb(2)*z(1)", 2), b)
    assert t.dim > spectra.JACOBI_MAX_DIM
    np.testing.assert_allclose(spectra.hermitian_eigenvalues(t), np.linalg.eigvalsh(t.entries), atol=1e-12)
    assert spectra.eigen_residual(t) <= 1e-10


def test_eigenvalue_bracket():
    ks = [8, 16, 32, 64]
    viol = []
    for k in ks:
        ev = spectra.spectrum((1, 2), parse_symbol("s(1)", 2), k)
        viol.append(max(ev.max() - 1.0, -ev.min(), 0.0))
    slope = np.polyfit(np.log(ks), np.log(viol), 1)[0]
    assert slope <= -0.8


def test_density_compare_linear():
    cmp = spectra.density_compare((1, 2), parse_symbol("s(1)", 2), [Polynomial([0, 1.0])], range(8, 65, 2), 1,
                                  labels=["x"])
    assert cmp.decay["x"].passed
    assert max(abs(r.residuals["x"]) for r in cmp.reports) <= 1e-9
    with pytest.raises(ValueError):
        spectra.density_compare((1, 2), parse_symbol("z(1)", 2), [Polynomial([1.0])], [4, 6], 0)
