"""The reduced side of the oscillator: weighted simplex, V_k, phi, I_k.

Conventions used throughout:

* The level set is {sum p_i s_i = 1}; the reduced space is the weighted
  simplex Delta' in the actions times the residual torus of angles.  Its
  measure is the Leray measure ds_{free}/p_j times (2 pi)^(n-1) of angle mass.
* V_k restricts a level-k monomial to the level set and rescales by
  (2 pi / k)^(1/4); in monomial bases V_k is diagonal with entries d_alpha.
* Along the complexified orbit t -> l_{it} y the actions flow as
  s_i(t) = exp(-2 p_i t) s_i(y), and the volume element of C^n splits as
  exp(-2 t sum p) 2 sum p_i^2 s_i(y) dt times the level-set measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .fock import (EigenspaceBasis, WeightVector, as_weights, enumerate_basis,
                   exact_norm_sq, log_bargmann_norm_sq)
from .quadrature import (QuadratureError, integrate_box, integrate_simplex,
                         log_monomials)
from .symbols import PolySymbol, ReducedPoint

TWO_PI = 2.0 * math.pi
LOG_TWO_PI = math.log(TWO_PI)


# ---------------------------------------------------------------- simplex geometry

def weighted_moment_exact(exponents: Sequence[int], weights) -> Fraction:
    """Exact Leray moment prod a_i! / ((sum a + n - 1)! prod p_i^(a_i + 1))."""
    p = as_weights(weights).p
    a = tuple(int(x) for x in exponents)
    if len(a) != len(p):
        raise ValueError("exponent length does not match weights")
    num = 1
    den = math.factorial(sum(a) + len(a) - 1)
    for ai, pi in zip(a, p):
        num *= math.factorial(ai)
        den *= pi ** (ai + 1)
    return Fraction(num, den)


def weighted_moment(exponents: Sequence[int], weights) -> float:
    """Integral of prod s_i^a_i over Delta' against the Leray measure."""
    return float(weighted_moment_exact(exponents, weights))


@dataclass(frozen=True)
class SimplexDomain:
    """Delta' = {s >= 0 : sum p_i s_i = 1}, parametrized by all but one coordinate."""

    weights: WeightVector
    eliminated: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", as_weights(self.weights))
        j = self.weights.n - 1 if self.eliminated is None else int(self.eliminated)
        if not 0 <= j < self.weights.n:
            raise ValueError("eliminated coordinate out of range")
        object.__setattr__(self, "eliminated", j)

    def integrate(self, log_f, tol: float = 1e-10):
        return integrate_simplex(log_f, self.weights.p, self.eliminated, tol=tol)

    def moment(self, exponents: Sequence[int], tol: float = 1e-12) -> float:
        """Moment by quadrature in this parametrization (closed form is weighted_moment)."""
        a = np.array([exponents], dtype=float)
        res = self.integrate(lambda s: (log_monomials(s, a), np.ones((len(s), 1))), tol=tol)
        return float(res.value[0])


def reduced_volume(weights) -> float:
    """Total mass (2 pi)^(n-1) |Delta'| of the reduced measure."""
    w = as_weights(weights)
    return TWO_PI ** (w.n - 1) * weighted_moment((0,) * w.n, w)


# ---------------------------------------------------------------- reduced norms and V_k

def log_reduced_norms(indices: Sequence[Sequence[int]], weights, k: int, tol: float = 1e-10) -> np.ndarray:
    """log of (2 pi/k)^(1/2) (2 pi)^(n-1) int_Delta' exp(-k sum s) s^alpha dsigma, for each alpha."""
    w = as_weights(weights)
    A = np.array(indices, dtype=float).reshape(-1, w.n)
    for alpha in A:
        if int(round(np.dot(alpha, w.p))) != k:
            raise ValueError(f"multi-index {tuple(int(x) for x in alpha)} is not at level k={k}")

    def log_f(s):
        lf = log_monomials(s, A) - k * s.sum(axis=1)[:, None]
        return lf, np.ones_like(lf)

    res = integrate_simplex(log_f, w.p, tol=tol)
    return res.log_value + 0.5 * (LOG_TWO_PI - math.log(k)) + (w.n - 1) * LOG_TWO_PI


def reduced_norm_sq(alpha: Sequence[int], weights, k: int, tol: float = 1e-10) -> float:
    """Squared norm of the restriction of z^alpha on the reduced space."""
    return float(np.exp(log_reduced_norms([alpha], weights, k, tol)[0]))


def stirling_sequence(k: int) -> float:
    """d_k^2 * sqrt(2) for n = 1, p = (1), alpha = (k)."""
    log_d2 = log_reduced_norms([(k,)], (1,), k)[0] - log_bargmann_norm_sq((k,), (1,), k)
    return math.exp(log_d2) * math.sqrt(2.0)


@dataclass(frozen=True)
class CalibrationResult:
    value: float
    error: float
    ks: tuple[int, ...]
    table: tuple[tuple[float, ...], ...] = field(repr=False)


@lru_cache(maxsize=None)
def calibrate(k0: int = 32, levels: int = 7) -> CalibrationResult:
    """Richardson extrapolation of the n = 1 sequence d_k^2 sqrt(2) to k = infinity."""
    ks = tuple(k0 * 2 ** j for j in range(levels))
    table = [[stirling_sequence(k)] for k in ks]
    for j in range(1, levels):
        for m in range(1, j + 1):
            f = 2.0 ** m
            table[j].append((f * table[j][m - 1] - table[j - 1][m - 1]) / (f - 1.0))
    value = table[-1][-1]
    error = abs(table[-1][-1] - table[-1][-2])
    return CalibrationResult(value, error, ks, tuple(tuple(r) for r in table))


def calibration_constant() -> float:
    return calibrate().value


@dataclass(frozen=True)
class ReductionMaps:
    """Diagonal of V_k in orthonormal monomial bases, with the calibration constant."""

    basis: EigenspaceBasis
    v_diag: np.ndarray = field(repr=False)
    calibration: float

    @property
    def V(self) -> np.ndarray:
        return np.diag(self.v_diag)

    @property
    def W(self) -> np.ndarray:
        return np.diag(1.0 / self.v_diag)

    @property
    def U(self) -> np.ndarray:
        """V (V* V)^(-1/2) computed as written; equals the identity here."""
        vv = self.V.T @ self.V
        if np.count_nonzero(vv - np.diag(np.diag(vv))) == 0:
            # diagonal case: d / sqrt(d^2) is exactly 1 in IEEE arithmetic
            return self.V / np.sqrt(np.diag(vv))[None, :]
        evals, evecs = np.linalg.eigh(vv)
        return self.V @ (evecs @ np.diag(evals ** -0.5) @ evecs.T)

    @property
    def vstar_v(self) -> np.ndarray:
        return self.v_diag ** 2

    def conjugate(self, matrix: np.ndarray) -> np.ndarray:
        u = self.U
        return u @ matrix @ u.conj().T


def build_reduction_maps(basis: EigenspaceBasis, tol: float = 1e-10, calibration: float | None = None) -> ReductionMaps:
    if basis.dim == 0:
        raise ValueError("basis is empty")
    log_red = log_reduced_norms(basis.indices, basis.weights, basis.k, tol)
    log_bar = np.array([e.log() for e in basis.exact_norms])
    d = np.exp(0.5 * (log_red - log_bar))
    cal = calibration_constant() if calibration is None else calibration
    return ReductionMaps(basis, d, cal)


@dataclass(frozen=True)
class SymbolLawCheck:
    k: int
    deviations: np.ndarray = field(repr=False)

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviations))


def vstar_v_symbol_check(basis: EigenspaceBasis, calibration: float | None = None) -> SymbolLawCheck:
    """Deviation of d_alpha^2 from the leading symbol C (2 sum p_i^2 alpha_i / k)^(-1/2)."""
    maps = build_reduction_maps(basis, calibration=calibration)
    p = np.array(basis.weights.p, dtype=float)
    A = np.array(basis.indices, dtype=float)
    g = 2.0 * (A @ (p ** 2)) / basis.k
    dev = np.abs(maps.vstar_v * np.sqrt(g) / maps.calibration - 1.0)
    return SymbolLawCheck(basis.k, dev)


# ---------------------------------------------------------------- phi and the control norm

def phi(t, y: ReducedPoint | Sequence[float], weights) -> np.ndarray:
    """phi(t, y) = 2t + sum s_i(y) (exp(-2 p_i t) - 1)."""
    p = np.array(as_weights(weights).p, dtype=float)
    s = np.array(y.s if isinstance(y, ReducedPoint) else y, dtype=float)
    t = np.asarray(t, dtype=float)
    return 2.0 * t + np.sum(s * np.expm1(-2.0 * p * t[..., None]), axis=-1)


def phi_dt2(t, y: ReducedPoint | Sequence[float], weights) -> np.ndarray:
    """Second t-derivative 4 sum p_i^2 s_i(t, y)."""
    p = np.array(as_weights(weights).p, dtype=float)
    s = np.array(y.s if isinstance(y, ReducedPoint) else y, dtype=float)
    t = np.asarray(t, dtype=float)
    return 4.0 * np.sum(p ** 2 * s * np.exp(-2.0 * p * t[..., None]), axis=-1)


def fiber_density(t, y: ReducedPoint | Sequence[float], weights) -> np.ndarray:
    """Volume factor of C^n along t: exp(-2 t sum p) * 2 sum p_i^2 s_i(y)."""
    p = np.array(as_weights(weights).p, dtype=float)
    s = np.array(y.s if isinstance(y, ReducedPoint) else y, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.exp(-2.0 * t * p.sum()) * 2.0 * np.sum(p ** 2 * s)


def flow(t: float, y: ReducedPoint, weights) -> np.ndarray:
    """The point l_{it} y in C^n: z_i -> exp(-p_i t) z_i."""
    p = np.array(as_weights(weights).p, dtype=float)
    return np.exp(-p * t) * y.lift()


def control_norm_check(alpha: Sequence[int], weights, k: int, t: float, y: ReducedPoint) -> float:
    """Relative residual of |Psi|^2 e^{-k|z|^2}(l_{it} y) = e^{-k phi} (same at y).

    Both sides are evaluated in log form from the actual points of C^n, built
    in extended precision: at |t| ~ 2 the exponent k|z|^2 reaches ~1e7 and
    cancels against k phi, which would cost double precision ~1e-9.  The
    residual is taken relative to the predicted value exp(-k phi) rhs.
    """
    w = as_weights(weights)
    y.check(w)
    alpha = np.array(alpha)
    if int(np.dot(alpha, w.p)) != k:
        raise ValueError("alpha is not at level k")
    ld = np.longdouble
    p = np.array(w.p, dtype=ld)
    s = np.array(y.s, dtype=ld)
    theta = np.array(y.theta, dtype=ld)
    tt = ld(t)

    def point(scale):
        return scale * np.sqrt(s) * (np.cos(theta) + 1j * np.sin(theta)).astype(np.clongdouble)

    def log_density(z):
        mod2 = z.real ** 2 + z.imag ** 2
        if np.any((mod2 == 0) & (alpha > 0)):
            return None
        logs = np.where(alpha > 0, alpha * np.log(np.where(mod2 > 0, mod2, ld(1))), ld(0))
        return np.sum(logs) - k * np.sum(mod2)

    lhs = log_density(point(np.exp(-p * tt)))
    rhs = log_density(point(np.ones_like(p)))
    if rhs is None:
        return 0.0 if lhs is None else float("inf")
    phi_ld = 2 * tt + np.sum(s * np.expm1(-2 * p * tt))
    return abs(math.expm1(float(lhs - (rhs - k * phi_ld))))


# ---------------------------------------------------------------- the integration map I_k

@dataclass(frozen=True)
class GaussianBump:
    """Action function P(s) exp(-rate (sum p_i s_i - 1)), peaked near the level set."""

    poly: PolySymbol
    rate: float
    weights: WeightVector

    def moment(self, alpha: Sequence[int], k: int) -> float:
        """Exact <f z^alpha, z^alpha> in the Bargmann space."""
        p = self.weights.p
        total = 0.0
        for (g, d, l), c in self.poly.terms.items():
            term = c.real * float(k) ** (-l)
            for ai, gi, pi in zip(alpha, g, p):
                kk = k + self.rate * pi
                term *= TWO_PI * math.exp(math.lgamma(ai + gi + 1) - (ai + gi + 1) * math.log(kk))
            total += term
        return math.exp(self.rate) * total


def _action_values(f, S: np.ndarray, k: int, weights: WeightVector) -> np.ndarray:
    """Values of an action function at actions S (..., n)."""
    if isinstance(f, GaussianBump):
        base = _action_values(f.poly, S, k, weights)
        h = S @ np.array(weights.p, dtype=float)
        return base * np.exp(-f.rate * (h - 1.0))
    out = np.zeros(S.shape[:-1])
    for (g, d, l), c in f.terms.items():
        if g != d:
            raise ValueError("I_k needs an action function (gamma = delta terms only)")
        out = out + c.real * float(k) ** (-l) * np.prod(S ** np.array(g, dtype=float), axis=-1)
    return out


def _symbol_degree(f) -> int:
    poly = f.poly if isinstance(f, GaussianBump) else f
    return max((sum(g) for g, _, _ in poly.terms), default=0)


def _t_window(p: np.ndarray, k: int, degree: int, spread: float = 0.0) -> tuple[float, float]:
    """Generous t-range outside which exp(-k phi) times the growth is below e^-80.

    Uses phi >= 2t - 1 for t > 0 and phi >= 2 min(p) t^2 for t < 0.
    """
    pmin, pmax = float(p.min()), float(p.max())
    hi = 0.5 * (1.0 + 80.0 / k) + 0.25
    growth = 2.0 * (p.sum() + degree * pmax + spread) + 1.0
    lo = -(growth + math.sqrt(growth ** 2 + 8.0 * k * pmin * 80.0)) / (4.0 * k * pmin)
    return lo, hi


def _fiber_log_integrand(f, t: np.ndarray, S: np.ndarray, k: int, w: WeightVector):
    """log|exp(-k phi) f(s(t)) delta(t)| and its sign, shape (len(t), len(S))."""
    p = np.array(w.p, dtype=float)
    decay = np.exp(-2.0 * p[None, :] * t[:, None])
    st = S[None, :, :] * decay[:, None, :]
    ph = 2.0 * t[:, None] + np.sum(S[None, :, :] * np.expm1(-2.0 * p * t[:, None])[:, None, :], axis=-1)
    with np.errstate(divide="ignore"):
        log_dens = math.log(2.0) - 2.0 * t[:, None] * p.sum() + np.log(S @ (p ** 2))[None, :]
    vals = _action_values(f, st, k, w)
    with np.errstate(divide="ignore"):
        log_vals = np.log(np.abs(vals))
    return -k * ph + log_dens + log_vals, np.sign(vals)


FIBER_CHUNK = 512


def _fiber_integrals(f, S: np.ndarray, w: WeightVector, k: int, pieces, tol: float) -> np.ndarray:
    """int over each (a, b) in pieces of exp(-k phi) f delta dt, for every row of S, summed."""
    if len(S) > FIBER_CHUNK:
        # bounded memory: the t-grid scan is (4001, rows, n)
        return np.concatenate([_fiber_integrals(f, S[i:i + FIBER_CHUNK], w, k, pieces, tol)
                               for i in range(0, len(S), FIBER_CHUNK)])
    p = np.array(w.p, dtype=float)
    lo, hi = _t_window(p, k, _symbol_degree(f), getattr(f, "rate", 0.0))
    grid = np.linspace(lo, hi, 4001)
    lg, _ = _fiber_log_integrand(f, grid, S, k, w)
    lg = np.where(np.isfinite(lg), lg, -np.inf)
    col_max = np.max(lg, axis=0)
    live = np.any(lg > (col_max - 60.0)[None, :], axis=1)
    if live[0] or live[-1]:
        raise QuadratureError("fiber integrand not negligible at the t-window edge", float("inf"))
    idx = np.nonzero(live)[0]
    a = grid[max(idx[0] - 1, 0)]
    b = grid[min(idx[-1] + 1, grid.size - 1)]
    total = np.zeros(len(S))
    for pa, pb in pieces:
        pa = a if pa is None else max(pa, a)
        pb = b if pb is None else min(pb, b)
        if pb <= pa:
            continue

        def log_f(x):
            return _fiber_log_integrand(f, x[:, 0], S, k, w)

        res = integrate_box(log_f, [pa], [pb], tol=tol, min_panels=4)
        total += res.value
    return total


def _ik_prefactor(k: int, calibration: float) -> float:
    # (k / 2 pi)^(1/2) times the orbit factor sqrt(2)/C (= 2 pi with the exact C)
    return math.sqrt(k / TWO_PI) * math.sqrt(2.0) / calibration


def integrate_Ik_many(f, S: np.ndarray, weights, k: int, calibration: float | None = None,
                      tol: float = 1e-12) -> np.ndarray:
    """I_k(f) at every row of S (points of Delta')."""
    w = as_weights(weights)
    cal = calibration_constant() if calibration is None else calibration
    S = np.atleast_2d(np.asarray(S, dtype=float))
    return _ik_prefactor(k, cal) * _fiber_integrals(f, S, w, k, [(None, None)], tol)


def integrate_Ik(f, x: ReducedPoint, weights, k: int, calibration: float | None = None,
                 tol: float = 1e-12) -> float:
    """Push-forward I_k(f)(x) = (k/2pi)^(1/2) (sqrt 2 / C) int exp(-k phi) f(s(t, x)) delta(t, x) dt."""
    w = as_weights(weights)
    x.check(w)
    return float(integrate_Ik_many(f, np.array([x.s]), w, k, calibration, tol)[0])


def ik_leading(x: ReducedPoint | Sequence[float], weights, calibration: float | None = None) -> float:
    """Large-k limit of I_k(1): (2 sum p_i^2 s_i)^(1/2) / C."""
    p = np.array(as_weights(weights).p, dtype=float)
    s = np.array(x.s if isinstance(x, ReducedPoint) else x, dtype=float)
    cal = calibration_constant() if calibration is None else calibration
    return math.sqrt(2.0 * float(np.sum(p ** 2 * s))) / cal


@dataclass(frozen=True)
class PresCheck:
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    lhs: float
    rhs: float

    @property
    def relative_error(self) -> float:
        if self.lhs == 0.0:
            return abs(self.rhs)
        return abs(self.lhs - self.rhs) / abs(self.lhs)


def _residual_angle_average(diff: Sequence[int]) -> float:
    """Average over the residual torus of exp(i <diff, theta>) with theta = (phi, 0): 1 or 0."""
    return 0.0 if any(diff[:-1]) else 1.0


def pres_identity_check(f, alpha: Sequence[int], beta: Sequence[int], weights, k: int,
                        calibration: float | None = None, tol: float = 1e-10) -> PresCheck:
    """Both sides of (f Psi, Psi')_{C^n} = (I_k(f) V Psi, V Psi')_{M_r} for monomials.

    The left side is an exact Gaussian moment.  The right side integrates I_k(f)
    times the restricted monomials over Delta' and the residual angles.
    """
    w = as_weights(weights)
    alpha, beta = tuple(alpha), tuple(beta)
    if isinstance(f, PolySymbol):
        f = GaussianBump(f.with_n(w.n), 0.0, w)
    norm = math.sqrt(float(exact_norm_sq(alpha, k)) * float(exact_norm_sq(beta, k)))
    lhs = f.moment(alpha, k) / norm if alpha == beta else 0.0
    diff = tuple(a - b for a, b in zip(alpha, beta))
    angle = _residual_angle_average(diff)
    if angle == 0.0:
        return PresCheck(alpha, beta, lhs, 0.0)
    cal = calibration_constant() if calibration is None else calibration
    expo = np.array([[0.5 * (a + b) for a, b in zip(alpha, beta)]])
    log_norm = 0.5 * (exact_norm_sq(alpha, k).log() + exact_norm_sq(beta, k).log())

    def log_f(S):
        ik = integrate_Ik_many(f, S, w, k, cal, tol=tol * 1e-2)
        with np.errstate(divide="ignore"):
            lf = log_monomials(S, expo)[:, 0] - k * S.sum(axis=1) + np.log(np.abs(ik)) - log_norm
        return lf[:, None], np.sign(ik)[:, None]

    res = integrate_simplex(log_f, w.p, tol=tol)
    scale = TWO_PI ** (w.n - 1) * math.sqrt(TWO_PI / k) * angle
    return PresCheck(alpha, beta, lhs, float(res.value[0]) * scale)


# ---------------------------------------------------------------- concentration

def concentration_bound(weights, epsilon: float) -> float:
    """C(eps) = min of phi over |t| = eps and the level set (attained at vertices)."""
    p = as_weights(weights).p
    best = math.inf
    for pi in p:
        for t in (epsilon, -epsilon):
            best = min(best, 2.0 * t + math.expm1(-2.0 * pi * t) / pi)
    return best


@dataclass(frozen=True)
class ConcentrationScan:
    ks: tuple[int, ...]
    ratios: tuple[float, ...]
    epsilon: float
    bound: float
    linear_slope: float
    laplace_rate: float
    laplace_power: float


def fit_exponential_rate(ks: Sequence[int], ratios: Sequence[float]) -> tuple[float, float, float]:
    """Fit log r = a - slope k (linear) and log r = a + b log k - C k (Laplace form).

    Returns (linear slope, C, b).
    """
    ks = np.asarray(ks, dtype=float)
    y = np.log(np.asarray(ratios, dtype=float))
    linear = float(np.polyfit(ks, y, 1)[0])
    A = np.column_stack([np.ones_like(ks), np.log(ks), ks])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return linear, float(-coef[2]), float(coef[1])


def outside_mass_fractions(weights, k: int, epsilon: float, tol: float = 1e-9) -> tuple[tuple, np.ndarray]:
    """For every basis monomial, the fraction of its norm outside {l_{it} y : |t| < eps}."""
    w = as_weights(weights)
    basis = enumerate_basis(w, k)
    A = np.array(basis.indices, dtype=float)
    log_norms = np.array([e.log() for e in basis.exact_norms])
    one = PolySymbol.constant(w.n)

    def log_f(S):
        tails = _fiber_integrals(one, S, w, k, [(epsilon, None), (None, -epsilon)], tol * 1e-2)
        with np.errstate(divide="ignore"):
            lf = log_monomials(S, A) - k * S.sum(axis=1)[:, None] + np.log(tails)[:, None]
        return lf, np.ones_like(lf)

    res = integrate_simplex(log_f, w.p, tol=tol)
    log_mass = res.log_value + w.n * LOG_TWO_PI
    return basis.indices, np.exp(log_mass - log_norms)


def concentration_scan(weights, k_list: Sequence[int], epsilon: float, seed: int = 0) -> ConcentrationScan:
    """Mass of a random unit state outside P_eps, for each k.

    The region is torus invariant, so cross terms between monomials vanish
    and the ratio is the |c_alpha|^2-weighted mean of the monomial fractions.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    w = as_weights(weights)
    rng = np.random.default_rng(seed)
    ks, ratios = [], []
    for k in k_list:
        _, q = outside_mass_fractions(w, k, epsilon)
        if q.size == 0:
            continue
        c = rng.normal(size=q.size) + 1j * rng.normal(size=q.size)
        weight = np.abs(c) ** 2
        ks.append(int(k))
        ratios.append(float(np.sum(weight * q) / np.sum(weight)))
    linear, rate, power = fit_exponential_rate(ks, ratios) if len(ks) >= 3 else (math.nan,) * 3
    return ConcentrationScan(tuple(ks), tuple(ratios), epsilon, concentration_bound(w, epsilon),
                             linear, rate, power)
