"""Hermitian eigenvalues and the spectral-density comparison harness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .fock import WeightVector, as_weights, enumerate_basis
from .sectors import (AsymptoticModel, DecayCheck, FitResult, decay_order_check,
                      fit_subleading, leading_model, model_eval)
from .symbols import PolySymbol, average_circle, parse_symbol, render
from .wick import OperatorMatrix, lambda_toeplitz

JACOBI_MAX_DIM = 120


class ConvergenceError(RuntimeError):
    """The Jacobi sweeps did not reach the requested off-diagonal tolerance."""


class NonHermitianError(ValueError):
    def __init__(self, asymmetry: float):
        self.asymmetry = asymmetry
        super().__init__(f"matrix is not Hermitian: relative asymmetry {asymmetry:.3e} > 1e-10")


def _as_array(matrix) -> np.ndarray:
    a = matrix.entries if isinstance(matrix, OperatorMatrix) else np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    return a.astype(complex)


def asymmetry(a: np.ndarray) -> float:
    scale = np.linalg.norm(a)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(a - a.conj().T) / scale)


def jacobi_eigh(a: np.ndarray, tol: float = 1e-13, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi for a complex Hermitian matrix.

    Each rotation first removes the phase of a_pq with diag(1, e^{-i psi}) and
    then applies a real plane rotation.  Stops when the off-diagonal Frobenius
    mass is at most ``tol`` times the Frobenius norm.
    """
    a = np.array(a, dtype=complex)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    # work at unit scale so squared entries neither underflow nor overflow;
    # a power of two keeps the scaling exact
    amax = float(np.max(np.abs(a))) if a.size else 0.0
    if n <= 1 or amax == 0:
        return np.real(np.diag(a)).copy(), v
    amax = math.ldexp(1.0, math.frexp(amax)[1])
    a = a / amax
    norm = np.linalg.norm(a)

    def off():
        return float(np.linalg.norm(a - np.diag(np.diag(a))))

    for _ in range(max_sweeps):
        if off() <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300 or mag < 1e-18 * norm:
                    continue
                phase = apq / mag
                # phase step on index q
                a[:, q] *= phase.conjugate()
                a[q, :] *= phase
                v[:, q] *= phase.conjugate()
                app, aqq = a[p, p].real, a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * mag
                a[q, q] = aqq + t * mag
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if off() > tol * norm:
            raise ConvergenceError("Jacobi iteration did not converge")
    w = np.real(np.diag(a)) * amax
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigensystem(matrix, method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Sorted eigenvalues and eigenvectors; rejects non-Hermitian input."""
    a = _as_array(matrix)
    asym = asymmetry(a)
    if asym > 1e-10:
        raise NonHermitianError(asym)
    if method == "auto":
        method = "jacobi" if a.shape[0] <= JACOBI_MAX_DIM else "eigh"
    if method == "jacobi":
        return jacobi_eigh(a)
    if method == "eigh":
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
        return w, v
    raise ValueError(f"unknown method {method!r}")


def hermitian_eigenvalues(matrix, method: str = "auto") -> np.ndarray:
    return hermitian_eigensystem(matrix, method)[0]


def eigen_residual(matrix, method: str = "auto") -> float:
    """max_i ||T v_i - lambda_i v_i|| / ||T||_2."""
    a = _as_array(matrix)
    w, v = hermitian_eigensystem(a, method)
    scale = np.linalg.norm(a, 2) if a.size else 0.0
    if scale == 0:
        return 0.0
    r = a @ v - v * w[None, :]
    return float(np.max(np.linalg.norm(r, axis=0)) / scale)


def density_sum(matrix, f: Polynomial, method: str = "auto") -> float:
    """sum_i f(lambda_i)."""
    return float(np.sum(f(hermitian_eigenvalues(matrix, method))))


@lru_cache(maxsize=512)
def _cached_spectrum(p: tuple[int, ...], symbol_text: str, n: int, k: int) -> tuple[float, ...]:
    basis = enumerate_basis(WeightVector(p), k)
    symbol = parse_symbol(symbol_text, n)
    return tuple(hermitian_eigenvalues(lambda_toeplitz(symbol, basis)))


def spectrum(weights, symbol: PolySymbol, k: int) -> np.ndarray:
    """Eigenvalues of the lambda-Toeplitz operator, cached per (weights, symbol, k)."""
    w = as_weights(weights)
    symbol = symbol.with_n(w.n)
    return np.array(_cached_spectrum(w.p, render(symbol), w.n, int(k)))


@dataclass(frozen=True)
class SpectralDensityReport:
    k: int
    eigenvalues: np.ndarray = field(repr=False)
    f_moments: dict[str, float]
    model_values: dict[str, float]
    residuals: dict[str, float]

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)


@dataclass(frozen=True)
class DensityComparison:
    reports: tuple[SpectralDensityReport, ...]
    fits: dict[str, FitResult]
    decay: dict[str, DecayCheck]
    leading: dict[str, AsymptoticModel]


def _label(f: Polynomial) -> str:
    return " + ".join(f"{c!r}*x^{i}" for i, c in enumerate(f.coef) if c != 0) or "0"


def density_compare(weights, symbol: PolySymbol, f_list: Sequence[Polynomial], k_list: Sequence[int],
                    fit_order: int, labels: Sequence[str] | None = None,
                    on_alias: str = "merge") -> DensityComparison:
    """Exact spectral sums against the sector model, fitted on the first half of k_list."""
    w = as_weights(weights)
    symbol = symbol.with_n(w.n)
    if not symbol.is_hermitian(1e-12):
        raise ValueError("symbol must be Hermitian (real valued)")
    g0 = average_circle(symbol, w).principal()
    labels = list(labels) if labels is not None else [_label(f) for f in f_list]
    ks = sorted(int(k) for k in k_list)
    sums = {lab: [] for lab in labels}
    spectra = {}
    for k in ks:
        ev = spectrum(w, symbol, k)
        spectra[k] = ev
        for lab, f in zip(labels, f_list):
            sums[lab].append(float(np.sum(f(ev))))
    half = len(ks) // 2
    fits, decay, leading = {}, {}, {}
    for lab, f in zip(labels, f_list):
        lead = leading_model(w, g0, f)
        leading[lab] = lead
        fit = fit_subleading(list(zip(ks[:half], sums[lab][:half])), lead, fit_order, on_alias=on_alias)
        fits[lab] = fit
        test_ks = ks[half:]
        resid = [sums[lab][half + i] - model_eval(fit.model, k) for i, k in enumerate(test_ks)]
        scale = max(abs(x) for x in sums[lab]) if sums[lab] else 1.0
        decay[lab] = decay_order_check(test_ks, resid, w.n, fit_order, scale)
    reports = []
    for idx, k in enumerate(ks):
        moments = {lab: sums[lab][idx] for lab in labels}
        models = {lab: model_eval(fits[lab].model, k) for lab in labels}
        reports.append(SpectralDensityReport(k, spectra[k], moments, models,
                                             {lab: moments[lab] - models[lab] for lab in labels}))
    return DensityComparison(tuple(reports), fits, decay, leading)
