"""Kernel density estimation, the TPE-style suggestion baseline, and an
exactly-known Gaussian-mixture toy model for validating ratio estimators.

The KDE is a plain product-kernel estimator: Gaussian kernels with
normal-reference bandwidths on continuous dimensions, ordinal dimensions
treated as continuous on their real values (rounded back at sampling time),
and categorical dimensions modeled by add-one-smoothed empirical
frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .ratio import relative_ratio
from .space import Categorical, Continuous, Ordinal, SearchSpace, assign_labels, uniform_sample

__all__ = [
    "normal_reference_bandwidth",
    "Kde",
    "ToyMixture",
    "tpe_suggest",
    "DENOMINATOR_FLOOR",
]

# keeps the ordinary-ratio baseline finite where the denominator KDE vanishes
DENOMINATOR_FLOOR = 1e-12


def normal_reference_bandwidth(samples) -> float:
    """1-d normal-reference rule: sigma_hat * (4 / (3N))^(1/5)."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < 2 or np.all(samples == samples[0]):
        raise ValueError("bandwidth rule needs at least 2 distinct samples")
    sigma = float(np.std(samples, ddof=1))
    return sigma * (4.0 / (3.0 * n)) ** 0.2


def _bandwidth_or_fallback(samples: np.ndarray, width: float) -> float:
    try:
        return normal_reference_bandwidth(samples)
    except ValueError:
        # degenerate column (all values equal): fall back to a sliver of the
        # dimension's range so the estimator stays proper
        return max(1e-3 * width, 1e-12)


class Kde:
    """Product-kernel density estimate over a search space's dimensions."""

    def __init__(self, space: SearchSpace, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != space.dim:
            raise ValueError(f"samples have {X.shape[1]} columns, space has {space.dim}")
        if X.shape[0] < 1:
            raise ValueError("need at least one sample")
        self.space = space
        self.centers = X
        lo, hi = space.bounds()
        self.bandwidths = np.ones(space.dim)
        self.freq_tables: dict[int, np.ndarray] = {}
        for j, d in enumerate(space.dims):
            if isinstance(d, Categorical):
                counts = np.bincount(X[:, j].astype(int), minlength=d.arity).astype(float)
                self.freq_tables[j] = (counts + 1.0) / (counts.sum() + d.arity)
            else:
                self.bandwidths[j] = _bandwidth_or_fallback(X[:, j], hi[j] - lo[j])

    def pdf(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.space.dim,):
            raise ValueError("dimension mismatch")
        # per-center kernel product over the continuous-like dims
        log_k = np.zeros(len(self.centers))
        cat_factor = 1.0
        for j, d in enumerate(self.space.dims):
            if isinstance(d, Categorical):
                cat_factor *= self.freq_tables[j][int(x[j])]
            else:
                h = self.bandwidths[j]
                u = (x[j] - self.centers[:, j]) / h
                log_k += norm.logpdf(u) - np.log(h)
        return float(cat_factor * np.mean(np.exp(log_k)))

    def pdf_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.pdf(x) for x in X])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n points: pick a center, perturb by the kernel, snap discrete dims."""
        idx = rng.integers(0, len(self.centers), size=n)
        out = self.centers[idx].copy()
        for j, d in enumerate(self.space.dims):
            if isinstance(d, Categorical):
                out[:, j] = rng.choice(d.arity, size=n, p=self.freq_tables[j]).astype(float)
            else:
                out[:, j] += self.bandwidths[j] * rng.standard_normal(n)
                if isinstance(d, Ordinal):
                    vals = np.asarray(d.values)
                    out[:, j] = vals[np.argmin(np.abs(out[:, j, None] - vals[None, :]), axis=1)]
        return out


@dataclass(frozen=True)
class ToyMixture:
    """1-d toy model with exactly known densities.

    The below-threshold density is the two-component Gaussian mixture
    0.3 N(2, 1^2) + 0.7 N(-3, 0.5^2); the above-threshold density is
    N(0, 2^2). Samples carry binary labels with a fraction ``gamma`` drawn
    from the mixture.
    """

    weights: tuple = (0.3, 0.7)
    means: tuple = (2.0, -3.0)
    stds: tuple = (1.0, 0.5)
    g_mean: float = 0.0
    g_std: float = 2.0
    gamma: float = 0.25

    def ell_pdf(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for w, m, s in zip(self.weights, self.means, self.stds):
            total += w * norm.pdf(x, m, s)
        return total if total.ndim else float(total)

    def g_pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = norm.pdf(x, self.g_mean, self.g_std)
        return out if out.ndim else float(out)

    def true_ratio(self, x: float, gamma: float | None = None) -> float:
        """Exact gamma-relative ratio from the closed-form densities."""
        if gamma is None:
            gamma = self.gamma
        return relative_ratio(float(self.ell_pdf(x)), float(self.g_pdf(x)), gamma)

    def sample(self, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
        """Draw n labeled points: round(gamma*n) from ell (label 1), rest from g."""
        if n < 2:
            raise ValueError("need n >= 2")
        rng = np.random.default_rng(seed)
        n1 = int(round(self.gamma * n))
        n0 = n - n1
        comp = rng.choice(len(self.weights), size=n1, p=self.weights)
        x1 = np.array([rng.normal(self.means[c], self.stds[c]) for c in comp])
        x0 = rng.normal(self.g_mean, self.g_std, size=n0)
        xs = np.concatenate([x1, x0])
        zs = np.concatenate([np.ones(n1, dtype=int), np.zeros(n0, dtype=int)])
        return xs, zs


def _uniform_pdf(space: SearchSpace) -> float:
    """Density (continuous dims) times mass (discrete dims) of the uniform prior."""
    value = 1.0
    for d in space.dims:
        if isinstance(d, Continuous):
            value /= d.hi - d.lo
        elif isinstance(d, Ordinal):
            value /= len(d.values)
        else:
            value /= d.arity
    return value


def tpe_suggest(obs, space: SearchSpace, gamma: float, candidates: int, seed) -> np.ndarray:
    """TPE-style suggestion via split Parzen estimators.

    Fits a KDE to each side of the gamma-split and, as in the classic
    tree-structured Parzen estimator, mixes a uniform prior over the space
    into each estimator with the weight of one extra observation (without
    the prior component the sampler cannot leave the current best basin).
    Candidates are drawn from the good-side mixture and the draw maximizing
    the ordinary density-ratio of the two mixtures is returned.
    """
    if candidates < 1:
        raise ValueError("candidates must be >= 1")
    labeled = assign_labels(obs, gamma)
    X1 = labeled.xs[labeled.zs == 1]
    X0 = labeled.xs[labeled.zs == 0]
    if len(X1) < 2 or len(X0) < 2:
        raise ValueError("tpe needs at least 2 observations in each class")
    kde_l = Kde(space, X1)
    kde_g = Kde(space, X0)
    lo, hi = space.bounds()
    width = hi - lo
    # clip kernel widths to a fraction of the domain; without the lower clip a
    # tight elite cluster collapses its bandwidth and the sampler cannot move
    kde_l.bandwidths = np.clip(kde_l.bandwidths, width / min(100.0, len(X1) + 1.0), width)
    kde_g.bandwidths = np.clip(kde_g.bandwidths, width / min(100.0, len(X0) + 1.0), width)
    rng = np.random.default_rng(seed)

    w_l = 1.0 / (len(X1) + 1.0)
    w_g = 1.0 / (len(X0) + 1.0)
    from_prior = rng.random(candidates) < w_l
    cands = kde_l.sample(candidates, rng)
    n_prior = int(from_prior.sum())
    if n_prior:
        cands[from_prior] = uniform_sample(space, n_prior, rng)
    cands = np.array([space.round_to_feasible(c) for c in cands])

    u = _uniform_pdf(space)
    ell_hat = (1.0 - w_l) * kde_l.pdf_batch(cands) + w_l * u
    g_hat = (1.0 - w_g) * kde_g.pdf_batch(cands) + w_g * u
    scores = ell_hat / (g_hat + DENOMINATOR_FLOOR)
    return cands[int(np.argmax(scores))]
