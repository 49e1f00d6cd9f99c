"""Toeplitz (Wick) matrices on a joint eigenspace.

Two independent assemblies are provided.  ``toeplitz_matrix`` uses Gaussian
moments of the Bargmann measure; ``normal_ordered_matrix`` applies the
differential operator k^-|gamma| d^gamma after multiplication by z^delta and
uses exact integer arithmetic.  They agree to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fock import EigenspaceBasis, WeightVector, as_weights, enumerate_basis
from .symbols import PolySymbol, average_circle


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense matrix in the orthonormalized monomial basis."""

    basis: EigenspaceBasis
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.entries.shape != (self.basis.dim, self.basis.dim):
            raise ValueError("matrix shape does not match basis dimension")

    @property
    def dim(self) -> int:
        return self.basis.dim

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        a = self.entries
        scale = max(np.linalg.norm(a), 1e-300)
        return bool(np.linalg.norm(a - a.conj().T) <= tol * scale)


def _rising(start: int, count: int) -> int:
    """(start+1)(start+2)...(start+count)."""
    out = 1
    for j in range(1, count + 1):
        out *= start + j
    return out


def _prepare(f: PolySymbol, basis: EigenspaceBasis) -> PolySymbol:
    n = basis.weights.n
    if f.n > n:
        raise ValueError(f"symbol lives on C^{f.n} but basis on C^{n}")
    return f.with_n(n)


def _targets(term_key, basis: EigenspaceBasis):
    """Pairs (column j, alpha, m = alpha + delta, beta = m - gamma, row i) that contribute."""
    g, d, _ = term_key
    for j, alpha in enumerate(basis.indices):
        m = tuple(a + x for a, x in zip(alpha, d))
        beta = tuple(x - y for x, y in zip(m, g))
        if min(beta) < 0:
            continue
        i = basis.position(beta)
        if i is None:
            continue
        yield j, alpha, m, beta, i


def toeplitz_matrix(f: PolySymbol, basis: EigenspaceBasis) -> OperatorMatrix:
    """Matrix of Pi M_f Pi from Gaussian moments.

    Entry (beta, alpha) collects c k^-l ||z^m||^2 / (||z^alpha|| ||z^beta||) with
    m = alpha + delta = beta + gamma.  The moment ratios are short rising
    products, so no factorial of size k is ever formed.
    """
    f = _prepare(f, basis)
    k = basis.k
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for key, c in f.terms.items():
        g, d, l = key
        scale = c * float(k) ** (-l)
        kd, kg = float(k) ** sum(d), float(k) ** sum(g)
        for j, alpha, m, beta, i in _targets(key, basis):
            up = 1.0
            for a, x in zip(alpha, d):
                up *= float(_rising(a, x))
            down = 1.0
            for b, y in zip(beta, g):
                down *= float(_rising(b, y))
            # ||z^m||^2/||z^alpha||^2 = up/k^|d|, ||z^m||^2/||z^beta||^2 = down/k^|g|
            out[i, j] += scale * math.sqrt((up / kd) * (down / kg))
    return OperatorMatrix(basis, out)


def normal_ordered_matrix(f: PolySymbol, basis: EigenspaceBasis) -> OperatorMatrix:
    """Matrix of sum c k^-l k^-|gamma| d^gamma o z^delta, re-expanded on the basis.

    The derivative of z^m gives the exact integer m!/beta! z^beta; the change of
    normalization is the exact rational sqrt of prod beta!/alpha! k^(|alpha|-|beta|).
    """
    f = _prepare(f, basis)
    k = basis.k
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for key, c in f.terms.items():
        g, d, l = key
        scale = c * float(k) ** (-l)
        for j, alpha, m, beta, i in _targets(key, basis):
            falling = 1
            for mi, bi in zip(m, beta):
                falling *= _rising(bi, mi - bi)
            ratio = Fraction(1)
            for a, b in zip(alpha, beta):
                ratio *= Fraction(_rising(a, b - a)) if b >= a else Fraction(1, _rising(b, a - b))
            ratio *= Fraction(k) ** (sum(alpha) - sum(beta))
            value = Fraction(falling * falling, k ** (2 * sum(g))) * ratio
            out[i, j] += scale * math.sqrt(value)
    return OperatorMatrix(basis, out)


def lambda_toeplitz(f: PolySymbol, basis: EigenspaceBasis) -> OperatorMatrix:
    """Toeplitz matrix of the circle average of f (equal to that of f itself)."""
    return toeplitz_matrix(average_circle(_prepare(f, basis), basis.weights), basis)


@dataclass(frozen=True)
class CommutatorScan:
    ks: tuple[int, ...]
    norms: tuple[float, ...]
    slope: float


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])


def commutator_norm_scan(f: PolySymbol, g: PolySymbol, weights, k_list: Sequence[int]) -> CommutatorScan:
    """Spectral norm of [T_f, T_g] along k, with the fitted log-log slope."""
    w = as_weights(weights)
    for sym in (f, g):
        sym = sym.with_n(w.n)
        if any(sym.charge(key, w) for key in sym.terms):
            raise ValueError("commutator scan needs circle-invariant symbols")
    ks, norms = [], []
    for k in k_list:
        basis = enumerate_basis(w, k)
        if basis.dim == 0:
            continue
        a = toeplitz_matrix(f, basis).entries
        b = toeplitz_matrix(g, basis).entries
        comm = a @ b - b @ a
        ks.append(int(k))
        norms.append(float(np.linalg.norm(comm, 2)) if comm.size else 0.0)
    positive = [(k, v) for k, v in zip(ks, norms) if v > 0]
    slope = fit_loglog_slope(*zip(*positive)) if len(positive) >= 2 else float("nan")
    return CommutatorScan(tuple(ks), tuple(norms), slope)
