"""Twisted sectors of the weighted projective quotient and the spectral-density model.

A sector is a root of unity zeta with zeta^{p_i} = 1 for some i.  Its support
is the set of coordinates fixed by zeta; the sector contributes

    (k / 2 pi)^{n(zeta)} zeta^{-k} sum_l k^{-l} I_l(zeta)

to sum_i f(lambda_i(k)).  Leading terms are computed exactly; the rest are
fitted to exact data.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .fock import WeightVector, as_weights
from .reduction import weighted_moment_exact
from .symbols import PolySymbol, compose_polynomial

TWO_PI = 2.0 * math.pi


class RankDeficiency(ValueError):
    """The least-squares design is singular (too few k values or aliased columns)."""


@dataclass(frozen=True, order=True)
class RootOfUnity:
    """zeta = exp(2 pi i j / q) with gcd(j, q) = 1, or (0, 1) for zeta = 1."""

    q: int
    j: int

    def __post_init__(self):
        q, j = int(self.q), int(self.j) % int(self.q)
        if q < 1:
            raise ValueError("order must be positive")
        g = math.gcd(j, q)
        object.__setattr__(self, "q", q // g)
        object.__setattr__(self, "j", j // g)

    def pow(self, m: int) -> "RootOfUnity":
        return RootOfUnity(self.q, (self.j * m) % self.q)

    def conj(self) -> "RootOfUnity":
        return RootOfUnity(self.q, -self.j)

    def is_one(self) -> bool:
        return self.j == 0

    def is_real(self) -> bool:
        return self.q <= 2

    def to_complex(self) -> complex:
        if self.j == 0:
            return 1.0 + 0j
        if 2 * self.j == self.q:
            return -1.0 + 0j
        if 4 * self.j == self.q:
            return 1j
        if 4 * self.j == 3 * self.q:
            return -1j
        return cmath.exp(2j * math.pi * self.j / self.q)

    def __str__(self) -> str:
        if self.j == 0:
            return "1"
        return f"exp(2pi i {self.j}/{self.q})"


@dataclass(frozen=True)
class TwistedSector:
    zeta: RootOfUnity
    support: tuple[int, ...]
    m: int
    dim_n: int
    b: tuple[RootOfUnity, ...]
    c: RootOfUnity

    def effective_weights_for(self, weights) -> tuple[int, ...]:
        p = as_weights(weights).p
        return tuple(p[i] // self.m for i in self.support)


def divisor_supports(weights) -> set[int]:
    """All gcds of nonempty subfamilies of the weights (closure under gcd)."""
    found: set[int] = set()
    for x in as_weights(weights).p:
        found |= {math.gcd(x, y) for y in found} | {x}
    return found


def _divisors(x: int) -> list[int]:
    return [d for d in range(1, x + 1) if x % d == 0]


def enumerate_sectors(weights) -> list[TwistedSector]:
    """All zeta in G with support data, sorted by order then numerator."""
    w = as_weights(weights)
    orders = sorted({d for x in w.p for d in _divisors(x)})
    sectors = []
    for q in orders:
        for j in range(q):
            if math.gcd(j, q) != 1 and not (q == 1 and j == 0):
                continue
            zeta = RootOfUnity(q, j)
            support = tuple(i for i, x in enumerate(w.p) if x % q == 0)
            m = reduce(math.gcd, [w.p[i] for i in support])
            b = tuple(zeta.pow(w.p[i]) for i in range(w.n) if i not in support)
            sectors.append(TwistedSector(zeta, support, m, len(support) - 1, b, zeta))
    return sectors


def sector_integral(sector: TwistedSector, g: PolySymbol, weights) -> complex:
    """Integral of an action function over M_zeta.

    M_zeta = {sum_{i in I} p_i s_i = 1} with s_i = 0 off the support, which is
    the level 1/m of the effective weights p_i / m.  The measure is the Leray
    measure for the effective weights times (2 pi)^{n(zeta)} of angle mass.
    Angle integration removes every term with gamma != delta.
    """
    w = as_weights(weights)
    g = g.with_n(w.n)
    eff = sector.effective_weights_for(w)
    total = 0j
    for (gam, dl, l), c in g.terms.items():
        if gam != dl or l:
            continue
        if any(gam[i] for i in range(w.n) if i not in sector.support):
            continue
        a = tuple(gam[i] for i in sector.support)
        level = Fraction(1, sector.m) ** (sum(a) + len(a) - 1)
        total += c * float(level * weighted_moment_exact(a, eff))
    return total * TWO_PI ** sector.dim_n


def leading_coefficient(sector: TwistedSector, g0: PolySymbol, f, weights) -> complex:
    """I_0 = (1/m) prod_{i not in I} (1 - b_i)^{-1} int_{M_zeta} f(g_0)."""
    w = as_weights(weights)
    if not sector.support:
        raise ValueError("sector has empty support")
    f = f if isinstance(f, Polynomial) else Polynomial(f)
    fg = compose_polynomial(f, g0.principal().with_n(w.n))
    prefactor = 1.0 / sector.m
    for b in sector.b:
        prefactor /= 1.0 - b.to_complex()
    return prefactor * sector_integral(sector, fg, w)


@dataclass(frozen=True)
class AsymptoticModel:
    """Per-sector coefficient lists I_0, I_1, ... (raw, not divided by (2 pi)^n(zeta))."""

    sectors: tuple[TwistedSector, ...]
    coeffs: Mapping[RootOfUnity, tuple[complex, ...]] = field(default_factory=dict)

    def __post_init__(self):
        zetas = [s.zeta for s in self.sectors]
        if len(set(zetas)) != len(zetas):
            raise ValueError("sectors must be pairwise distinct")
        if RootOfUnity(1, 0) not in zetas:
            raise ValueError("the sector zeta = 1 must be present")

    def sector(self, zeta: RootOfUnity) -> TwistedSector:
        for s in self.sectors:
            if s.zeta == zeta:
                return s
        raise KeyError(zeta)

    def order(self) -> int:
        return max((len(c) for c in self.coeffs.values()), default=0) - 1

    def normalized(self, zeta: RootOfUnity, l: int) -> complex:
        """I_l(zeta) / (2 pi)^n(zeta), the coefficient of (k)^n(zeta) k^-l."""
        sec = self.sector(zeta)
        values = self.coeffs.get(zeta, ())
        return (values[l] if l < len(values) else 0.0) / TWO_PI ** sec.dim_n

    def with_coeffs(self, coeffs: Mapping[RootOfUnity, Sequence[complex]]) -> "AsymptoticModel":
        return AsymptoticModel(self.sectors, {z: tuple(complex(x) for x in v) for z, v in coeffs.items()})


def model_terms(model: AsymptoticModel, k: int) -> complex:
    total = 0j
    for sec in model.sectors:
        values = model.coeffs.get(sec.zeta, ())
        if not values:
            continue
        phase = sec.zeta.pow(-k).to_complex()
        series = sum(v * float(k) ** (-l) for l, v in enumerate(values))
        total += (k / TWO_PI) ** sec.dim_n * phase * series
    return total


def model_eval(model: AsymptoticModel, k: int) -> float:
    """Real value of the model; conjugate sectors must pair up."""
    for sec in model.sectors:
        if sec.zeta.is_real() or sec.zeta not in model.coeffs:
            continue
        partner = model.coeffs.get(sec.zeta.conj())
        mine = model.coeffs[sec.zeta]
        if partner is None or len(partner) != len(mine) or any(
                abs(a - b.conjugate()) > 1e-9 * max(1.0, abs(a)) for a, b in zip(mine, partner)):
            raise ValueError(f"sector {sec.zeta} has no conjugate partner with conjugate coefficients")
    value = model_terms(model, k)
    if abs(value.imag) > 1e-9 * max(1.0, abs(value)):
        raise ValueError(f"model value has imaginary part {value.imag:.3e}")
    return value.real


def leading_model(weights, g0: PolySymbol, f) -> AsymptoticModel:
    """Model holding the exactly computed I_0 for every sector."""
    sectors = tuple(enumerate_sectors(weights))
    coeffs = {s.zeta: (leading_coefficient(s, g0, f, weights),) for s in sectors}
    return AsymptoticModel(sectors, coeffs)


@dataclass(frozen=True)
class FitResult:
    model: AsymptoticModel
    max_residual: float
    residuals: tuple[tuple[int, float], ...]
    dropped: tuple[tuple[RootOfUnity, int], ...]


def _columns(model: AsymptoticModel, L: int):
    """Real unknowns: (zeta, l, part) with part 're' or 'im'; one per conjugate pair."""
    cols = []
    ordered = sorted(model.sectors, key=lambda s: (not s.zeta.is_one(), s.zeta.q, s.zeta.j))
    for l in range(1, L + 1):
        for sec in ordered:
            z = sec.zeta
            if z.is_real():
                cols.append((sec, l, "re"))
            elif z.j < z.q - z.j:
                cols.append((sec, l, "re"))
                cols.append((sec, l, "im"))
    cols.sort(key=lambda c: (not c[0].zeta.is_one(), c[1]))
    return cols


def _column_values(col, k: int) -> float:
    sec, l, part = col
    base = (k / TWO_PI) ** sec.dim_n * float(k) ** (-l)
    phase = sec.zeta.pow(-k).to_complex()
    if sec.zeta.is_real():
        return base * phase.real
    # unknown w contributes w zeta^-k + conj(w zeta^-k) = 2 Re(w zeta^-k)
    return 2.0 * base * (phase.real if part == "re" else -phase.imag)


def feasible_order(model: AsymptoticModel, n_points: int, cap: int = 4) -> int:
    """Largest L <= cap whose unknowns the fit can determine from n_points values (0 if none)."""
    for L in range(cap, 0, -1):
        if n_points >= 3 * len(_columns(model, L)):
            return L
    return 0


def fit_subleading(exact_values: Sequence[tuple[int, float]], model: AsymptoticModel, L: int,
                   on_alias: str = "merge", alias_tol: float = 1e-9) -> FitResult:
    """Least-squares fit of I_l, 1 <= l <= L, with the I_0 entries held fixed.

    Aliased columns (linearly dependent on earlier ones over the given k) are
    dropped when ``on_alias == "merge"``; their coefficients are reported as 0
    and absorbed by the column they alias.  With ``on_alias == "raise"`` a
    RankDeficiency is raised instead.
    """
    data = sorted((int(k), float(v)) for k, v in exact_values)
    ks = np.array([k for k, _ in data], dtype=float)
    y = np.array([v for _, v in data])
    base = model.with_coeffs({z: c[:1] for z, c in model.coeffs.items()})
    y_res = y - np.array([model_terms(base, int(k)).real for k in ks])
    cols = _columns(model, L)
    if len(data) < 3 * len(cols):
        raise RankDeficiency(f"{len(data)} k values for {len(cols)} unknowns; need at least {3 * len(cols)}")
    X = np.array([[_column_values(c, int(k)) for c in cols] for k in ks]).reshape(len(ks), len(cols))
    kept, dropped = [], []
    basis_q = np.zeros((len(ks), 0))
    for idx, col in enumerate(cols):
        v = X[:, idx]
        norm = np.linalg.norm(v)
        resid = v - basis_q @ (basis_q.T @ v) if basis_q.shape[1] else v
        if norm == 0 or np.linalg.norm(resid) <= alias_tol * norm:
            if on_alias == "raise":
                raise RankDeficiency(f"column (zeta={col[0].zeta}, l={col[1]}) is aliased on this k-list")
            dropped.append((col[0].zeta, col[1]))
            continue
        kept.append(idx)
        resid = resid - basis_q @ (basis_q.T @ resid) if basis_q.shape[1] else resid
        basis_q = np.column_stack([basis_q, resid / np.linalg.norm(resid)])
    # scale columns for conditioning, then solve
    Xk = X[:, kept]
    scales = np.linalg.norm(Xk, axis=0)
    sol, *_ = np.linalg.lstsq(Xk / scales, y_res, rcond=None)
    sol = sol / scales
    values: dict[tuple, float] = {(cols[i][0].zeta, cols[i][1], cols[i][2]): v for i, v in zip(kept, sol)}
    coeffs = {}
    for sec in model.sectors:
        z = sec.zeta
        lead = model.coeffs.get(z, (0j,))[0]
        series = [lead]
        for l in range(1, L + 1):
            if z.is_real():
                series.append(complex(values.get((z, l, "re"), 0.0)))
            else:
                leader = z if z.j < z.q - z.j else z.conj()
                w = complex(values.get((leader, l, "re"), 0.0), values.get((leader, l, "im"), 0.0))
                series.append(w if leader == z else w.conjugate())
        coeffs[z] = tuple(series)
    fitted = model.with_coeffs(coeffs)
    residuals = tuple((int(k), float(v - model_eval(fitted, int(k)))) for k, v in data)
    top = residuals[len(residuals) // 2:]
    return FitResult(fitted, max(abs(r) for _, r in top), residuals, tuple(dropped))


@dataclass(frozen=True)
class DecayCheck:
    passed: bool
    slope: float
    bound: float
    max_residual: float
    roundoff: bool


def decay_order_check(ks: Sequence[int], residuals: Sequence[float], n_top: int, L: int,
                      scale: float = 1.0) -> DecayCheck:
    """Out-of-sample residuals must decay like k^((n_top - 1) - L - 1 + 0.2) or faster.

    Residuals already at rounding level (<= 1e-8 scale) pass outright.
    """
    ks = np.asarray(ks, dtype=float)
    r = np.abs(np.asarray(residuals, dtype=float))
    bound = (n_top - 1) - L - 1 + 0.2
    worst = float(r.max()) if r.size else 0.0
    if worst <= 1e-8 * max(scale, 1.0):
        return DecayCheck(True, float("-inf"), bound, worst, True)
    mask = r > 0
    slope = float(np.polyfit(np.log(ks[mask]), np.log(r[mask]), 1)[0])
    return DecayCheck(slope <= bound, slope, bound, worst, False)
