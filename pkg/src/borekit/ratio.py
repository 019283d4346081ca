"""Relative density-ratios and reference expected-improvement computations.

The gamma-relative ratio of two densities l, g is

    r_gamma(x) = l(x) / (gamma * l(x) + (1 - gamma) * g(x)),

which reduces to the ordinary ratio l/g at gamma = 0 and is bounded above by
1/gamma for gamma > 0. The expected improvement of a Gaussian predictive is
provided in closed form and as a seeded Monte Carlo estimate, and
``ei_proportionality_error`` checks numerically that expected improvement is
proportional to the relative ratio on a fully known toy model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

__all__ = [
    "DensityPair",
    "GaussianPredictive",
    "relative_ratio",
    "h_gamma",
    "ei_gaussian",
    "ei_monte_carlo",
    "ei_proportionality_error",
]


def relative_ratio(ell_value: float, g_value: float, gamma: float) -> float:
    """gamma-relative ratio of a pair of density values at one point."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    if ell_value < 0 or g_value < 0:
        raise ValueError("density values must be nonnegative")
    if ell_value == 0.0 and g_value == 0.0:
        raise ValueError("ratio undefined where both densities vanish")
    denom = gamma * ell_value + (1.0 - gamma) * g_value
    if denom == 0.0:
        # only reachable at gamma = 0 with g = 0: the ordinary ratio diverges
        return float("inf")
    return ell_value / denom


@dataclass(frozen=True)
class DensityPair:
    """Point evaluators for the below-threshold and above-threshold densities."""

    ell: Callable[[float], float]
    g: Callable[[float], float]

    def ratio(self, x, gamma: float) -> float:
        return relative_ratio(float(self.ell(x)), float(self.g(x)), gamma)


def h_gamma(u: float, gamma: float) -> float:
    """Map an ordinary density-ratio value to the gamma-relative one.

    Strictly nondecreasing in u, with h_0 the identity and sup 1/gamma for
    gamma > 0. Defined as 0 at u = 0, by continuity.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    if u < 0:
        raise ValueError("u must be nonnegative")
    if u == 0.0:
        return 0.0
    if np.isinf(u):
        return np.inf if gamma == 0.0 else 1.0 / gamma
    return 1.0 / (gamma + (1.0 - gamma) / u)


@dataclass(frozen=True)
class GaussianPredictive:
    """Gaussian predictive distribution N(mu, sigma^2) for an output y."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def ei_gaussian(pred: GaussianPredictive, tau: float) -> float:
    """Closed-form expected improvement E[max(tau - y, 0)] under a Gaussian."""
    nu = (tau - pred.mu) / pred.sigma
    return float(pred.sigma * (nu * norm.cdf(nu) + norm.pdf(nu)))


def ei_monte_carlo(pred: GaussianPredictive, tau: float, samples: int, seed) -> tuple[float, float]:
    """Monte Carlo estimate of expected improvement with its standard error."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    y = pred.mu + pred.sigma * rng.standard_normal(samples)
    u = np.maximum(tau - y, 0.0)
    estimate = float(np.mean(u))
    stderr = float(np.std(u, ddof=1) / np.sqrt(samples))
    return estimate, stderr


def ei_proportionality_error(
    pair: DensityPair,
    y_marginal: Callable[[np.ndarray], np.ndarray],
    gamma: float,
    grid,
    y_lo: float = -10.0,
    y_hi: float = 10.0,
    n_quad: int = 2001,
) -> float:
    """Max relative error of the best proportional fit between EI and r_gamma.

    The toy joint model is defined by the given y-marginal density together
    with x | y ~ ell when y <= tau and x | y ~ g when y > tau, where tau is
    the gamma-quantile of the y-marginal. Expected improvement is integrated
    numerically at each grid point via fixed-step trapezoids (the y-range
    [y_lo, y_hi] must cover essentially all marginal mass; the defaults span
    at least 8 standard deviations of any unit-scale marginal), the relative
    ratio is evaluated on the same grid, a single scale is fitted by least
    squares, and the worst residual relative to the peak EI is returned.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    grid = np.asarray(grid, dtype=float)

    # invert the marginal cdf at gamma to find the threshold
    ys = np.linspace(y_lo, y_hi, n_quad)
    py = np.asarray(y_marginal(ys), dtype=float)
    cdf = np.concatenate([[0.0], np.cumsum((py[1:] + py[:-1]) * np.diff(ys) / 2.0)])
    cdf /= cdf[-1]
    tau = float(np.interp(gamma, cdf, ys))

    # fresh quadrature grids with tau as a node, so the piecewise conditional
    # likelihood is integrated without straddling its jump
    m = n_quad // 2 + 1
    y_below = np.linspace(y_lo, tau, m)
    y_above = np.linspace(tau, y_hi, m)
    p_below = np.asarray(y_marginal(y_below), dtype=float)
    p_above = np.asarray(y_marginal(y_above), dtype=float)

    alphas = np.empty_like(grid)
    ratios = np.empty_like(grid)
    for i, x in enumerate(grid):
        lx = float(pair.ell(x))
        gx = float(pair.g(x))
        like_below = lx * p_below
        like_above = gx * p_above
        evidence = np.trapezoid(like_below, y_below) + np.trapezoid(like_above, y_above)
        improvement = np.trapezoid((tau - y_below) * like_below, y_below)
        alphas[i] = improvement / evidence
        ratios[i] = relative_ratio(lx, gx, gamma)

    peak = np.max(alphas)
    if peak == 0.0:
        raise ValueError("degenerate grid: expected improvement vanishes everywhere")
    scale = float(np.dot(alphas, ratios) / np.dot(ratios, ratios))
    return float(np.max(np.abs(alphas - scale * ratios)) / peak)
