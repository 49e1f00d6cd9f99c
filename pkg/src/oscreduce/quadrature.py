"""Adaptive tensor Gauss-Legendre quadrature on boxes and weighted simplices.

Integrands are supplied in log form (they are products of large powers and
Gaussians), may be vector valued, and are refined by panel doubling until the
relative change drops below the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

MAX_NODES = 2 ** 20
NODES_PER_PANEL = 16


class QuadratureError(RuntimeError):
    """Raised when refinement stalls; ``estimate`` is the last relative change."""

    def __init__(self, message: str, estimate: float):
        self.estimate = estimate
        super().__init__(f"{message} (achieved relative error estimate {estimate:.3e})")


@dataclass(frozen=True)
class QuadResult:
    log_value: np.ndarray
    sign: np.ndarray
    error: float
    nodes: int

    @property
    def value(self) -> np.ndarray:
        return self.sign * np.exp(self.log_value)


@lru_cache(maxsize=None)
def _panel_rule(panels: int, m: int = NODES_PER_PANEL) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0, 1] with equal panels."""
    x, w = np.polynomial.legendre.leggauss(m)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _log_sum(log_f: np.ndarray, sign_f: np.ndarray, log_w: np.ndarray):
    """Signed log-sum-exp of w * f along axis 0."""
    terms = log_f + log_w[:, None]
    top = np.max(np.where(np.isfinite(terms), terms, -np.inf), axis=0)
    top = np.where(np.isfinite(top), top, 0.0)
    total = np.sum(sign_f * np.exp(terms - top[None, :]), axis=0)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(total)) + top, np.sign(total)


def integrate_box(log_f: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
                  lower: Sequence[float], upper: Sequence[float],
                  tol: float = 1e-10, max_nodes: int = MAX_NODES,
                  min_panels: int = 1) -> QuadResult:
    """Integrate over a box.

    ``log_f(points)`` takes an (N, d) array and returns ``(log|f|, sign f)``,
    each of shape (N, m) for m simultaneous integrands.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = lower.size
    scale = upper - lower
    prev = None
    panels = min_panels
    last_err = np.inf
    while True:
        x1, w1 = _panel_rule(panels)
        n_nodes = x1.size ** d
        if n_nodes > max_nodes:
            raise QuadratureError("node cap reached before convergence", last_err)
        grids = np.meshgrid(*([x1] * d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1) * scale + lower
        wgrids = np.meshgrid(*([w1] * d), indexing="ij")
        w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1) * np.prod(scale)
        lf, sf = log_f(pts)
        lf = np.asarray(lf, dtype=float).reshape(len(pts), -1)
        sf = np.asarray(sf, dtype=float).reshape(len(pts), -1)
        log_val, sign = _log_sum(lf, sf, np.log(w))
        log_abs, _ = _log_sum(lf, np.ones_like(sf), np.log(w))
        if prev is not None:
            # change relative to the integral of |f|, robust under cancellation
            ref = np.where(np.isfinite(log_abs), log_abs, 0.0)
            diff = np.abs(sign * np.exp(log_val - ref) - prev[1] * np.exp(prev[0] - ref))
            diff = np.where(np.isfinite(log_abs), diff, 0.0)
            last_err = float(np.max(diff)) if diff.size else 0.0
            if last_err < tol:
                return QuadResult(log_val, sign, last_err, n_nodes)
        prev = (log_val, sign)
        panels *= 2


def simplex_map(x: np.ndarray, weights: Sequence[int], eliminated: int) -> tuple[np.ndarray, np.ndarray]:
    """Map the unit cube onto the weighted simplex sum p_i s_i = 1.

    Stick breaking on u_i = p_i s_i over the free coordinates; the eliminated
    coordinate takes the remainder.  Returns the actions s (N, n) and the log
    of the Jacobian against the Leray measure ds_{free} / p_eliminated.
    """
    p = np.asarray(weights, dtype=float)
    n = p.size
    free = [i for i in range(n) if i != eliminated]
    N = x.shape[0]
    u = np.zeros((N, n))
    remaining = np.ones(N)
    log_jac = np.zeros(N)
    for col, i in enumerate(free):
        u[:, i] = remaining * x[:, col]
        with np.errstate(divide="ignore"):
            log_jac += np.log(remaining)
        remaining = remaining * (1.0 - x[:, col])
    u[:, eliminated] = remaining
    s = u / p[None, :]
    log_jac -= np.sum(np.log(p))
    return s, log_jac


def integrate_simplex(log_f: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
                      weights: Sequence[int], eliminated: int | None = None,
                      tol: float = 1e-10, max_nodes: int = MAX_NODES,
                      min_panels: int = 1) -> QuadResult:
    """Integrate ``f(s)`` against the Leray measure of {sum p_i s_i = 1}.

    ``log_f`` receives actions of shape (N, n).  For n = 1 the simplex is the
    single point s = 1/p.
    """
    p = tuple(int(x) for x in weights)
    n = len(p)
    if eliminated is None:
        eliminated = n - 1
    if not 0 <= eliminated < n:
        raise ValueError("eliminated coordinate out of range")
    if n == 1:
        s = np.array([[1.0 / p[0]]])
        lf, sf = log_f(s)
        lf = np.asarray(lf, dtype=float).reshape(1, -1)
        sf = np.asarray(sf, dtype=float).reshape(1, -1)
        # Leray measure of a point level set: delta(p s - 1) has mass 1/p
        return QuadResult(lf[0] - np.log(p[0]), sf[0], 0.0, 1)

    def mapped(x):
        s, log_jac = simplex_map(x, p, eliminated)
        lf, sf = log_f(s)
        lf = np.asarray(lf, dtype=float).reshape(len(s), -1)
        sf = np.asarray(sf, dtype=float).reshape(len(s), -1)
        return lf + log_jac[:, None], sf

    return integrate_box(mapped, [0.0] * (n - 1), [1.0] * (n - 1), tol=tol,
                         max_nodes=max_nodes, min_panels=min_panels)


def log_monomials(s: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """log prod_i s_i^a_i for each row of s and each exponent row; 0^0 = 1."""
    with np.errstate(divide="ignore"):
        log_s = np.log(s)
    exps = np.asarray(exponents, dtype=float)
    out = np.zeros((s.shape[0], exps.shape[0]))
    for i in range(s.shape[1]):
        a = exps[:, i]
        li = log_s[:, i][:, None]
        contrib = np.where(a[None, :] == 0, 0.0, a[None, :] * li)
        out += contrib
    return out
