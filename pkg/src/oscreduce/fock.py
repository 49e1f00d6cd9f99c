"""Weighted multi-index combinatorics and exact Bargmann-Fock norms.

The oscillator acts on C^n with coprime positive weights p.  Its eigenspace
at level k is spanned by the monomials z^alpha with sum_i p_i alpha_i = k.
Norms use the per-mode measure prod_i ds_i dtheta_i with s_i = |z_i|^2, so

    ||z^alpha||^2 = prod_i 2 pi alpha_i! / k^(alpha_i + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

MultiIndex = tuple[int, ...]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class WeightVector:
    """Coprime positive integer weights of the circle action."""

    p: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(x) for x in self.p)
        if len(p) < 1:
            raise ValueError("weights must have at least one entry")
        if any(x < 1 for x in p):
            raise ValueError(f"weights must be positive integers, got {p}")
        if reduce(math.gcd, p) != 1:
            raise ValueError(f"weights must be coprime (gcd 1), got {p}")
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return len(self.p)

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        """Build from a comma separated list such as ``"1,2"``."""
        try:
            values = tuple(int(x) for x in text.replace(" ", "").split(",") if x)
        except ValueError as exc:
            raise ValueError(f"cannot parse weights {text!r}") from exc
        return cls(values)

    def degree(self, alpha: Sequence[int]) -> int:
        return sum(pi * ai for pi, ai in zip(self.p, alpha))

    def __str__(self) -> str:
        return ",".join(str(x) for x in self.p)


def as_weights(weights) -> WeightVector:
    if isinstance(weights, WeightVector):
        return weights
    if isinstance(weights, str):
        return WeightVector.parse(weights)
    return WeightVector(tuple(weights))


def _check_alpha(alpha: Sequence[int], weights: WeightVector) -> MultiIndex:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != weights.n:
        raise ValueError(f"multi-index {alpha} has length {len(alpha)}, weights have n={weights.n}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index {alpha} has negative entries")
    return alpha


@dataclass(frozen=True)
class ExactNorm:
    """Squared norm stored as ``ratio * (2 pi)^power`` with ``ratio`` rational."""

    ratio: Fraction
    power: int

    def __float__(self) -> float:
        return float(self.ratio) * TWO_PI ** self.power

    def log(self) -> float:
        return math.log(self.ratio.numerator) - math.log(self.ratio.denominator) + self.power * math.log(TWO_PI)


def exact_norm_sq(alpha: Sequence[int], k: int) -> ExactNorm:
    num = 1
    for a in alpha:
        num *= math.factorial(a)
    den = k ** (sum(alpha) + len(alpha))
    return ExactNorm(Fraction(num, den), len(alpha))


def bargmann_norm_sq(alpha: Sequence[int], weights, k: int) -> float:
    """Squared Bargmann norm of z^alpha at parameter k, in double precision."""
    weights = as_weights(weights)
    alpha = _check_alpha(alpha, weights)
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(exact_norm_sq(alpha, k))


def log_bargmann_norm_sq(alpha: Sequence[int], weights, k: int) -> float:
    """Natural log of the squared norm; safe when the norm underflows."""
    weights = as_weights(weights)
    alpha = _check_alpha(alpha, weights)
    if k < 1:
        raise ValueError("k must be >= 1")
    return exact_norm_sq(alpha, k).log()


def oscillator_eigenvalue(alpha: Sequence[int], weights, k: int) -> float:
    """Eigenvalue <p, alpha>/k of the quantum oscillator on z^alpha."""
    weights = as_weights(weights)
    alpha = _check_alpha(alpha, weights)
    if k < 1:
        raise ValueError("k must be >= 1")
    return weights.degree(alpha) / k


def _compositions(p: tuple[int, ...], k: int) -> Iterable[MultiIndex]:
    if len(p) == 1:
        if k % p[0] == 0:
            yield (k // p[0],)
        return
    for a in range(k // p[0], -1, -1):
        for rest in _compositions(p[1:], k - a * p[0]):
            yield (a,) + rest


def graded_lex_key(alpha: MultiIndex):
    """Sort key: larger total degree first, then lexicographically descending."""
    return (-sum(alpha), tuple(-a for a in alpha))


@dataclass(frozen=True)
class EigenspaceBasis:
    """Monomial basis of the level-k eigenspace with exact norms."""

    weights: WeightVector
    k: int
    indices: tuple[MultiIndex, ...]
    exact_norms: tuple[ExactNorm, ...] = field(repr=False)
    norms_sq: np.ndarray = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def position(self, alpha: MultiIndex) -> int | None:
        return self._lookup.get(tuple(alpha))

    @property
    def _lookup(self) -> dict[MultiIndex, int]:
        cached = self.__dict__.get("_lookup_cache")
        if cached is None:
            cached = {a: i for i, a in enumerate(self.indices)}
            object.__setattr__(self, "_lookup_cache", cached)
        return cached


def enumerate_basis(weights, k: int, n: int | None = None) -> EigenspaceBasis:
    """All alpha with <p, alpha> = k in graded-lex order, with exact norms."""
    weights = as_weights(weights)
    if n is not None and n != weights.n:
        raise ValueError(f"dimension mismatch: weights have n={weights.n}, requested n={n}")
    if k < 0:
        raise ValueError("k must be >= 0")
    indices = tuple(sorted(_compositions(weights.p, k), key=graded_lex_key))
    kk = max(k, 1)
    exact = tuple(exact_norm_sq(a, kk) for a in indices)
    if k == 0:
        # only the constant; norm at k=0 is not defined, report 0-level placeholder
        norms = np.full(len(indices), np.nan)
    else:
        norms = np.array([float(e) for e in exact], dtype=float)
    return EigenspaceBasis(weights, k, indices, exact, norms)


def count_dim(weights, k: int) -> int:
    """Number of alpha with <p, alpha> = k, by the coin-change recursion in O(n k)."""
    weights = as_weights(weights)
    if k < 0:
        raise ValueError("k must be >= 0")
    ways = [0] * (k + 1)
    ways[0] = 1
    for p in weights.p:
        for m in range(p, k + 1):
            ways[m] += ways[m - p]
    return ways[k]
