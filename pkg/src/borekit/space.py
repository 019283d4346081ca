"""Search domains, observation storage, and quantile-based labeling.

Points are 1-d float arrays of length D. Ordinal dimensions store their
actual (real) values; categorical dimensions store integer codes
0..arity-1 as floats. How a classifier encodes these into features is the
classifier's concern, not the space's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Continuous",
    "Ordinal",
    "Categorical",
    "SearchSpace",
    "ObservationSet",
    "LabeledSet",
    "empirical_quantile",
    "assign_labels",
    "uniform_sample",
]


@dataclass(frozen=True)
class Continuous:
    """Bounded real interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("continuous bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"continuous dimension needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Ordinal:
    """Ordered discrete dimension taking one of a strictly increasing list of reals."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError("ordinal dimension needs at least 2 values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("ordinal values must be strictly increasing")


@dataclass(frozen=True)
class Categorical:
    """Unordered discrete dimension with integer codes 0..arity-1."""

    arity: int

    def __post_init__(self):
        if self.arity < 2:
            raise ValueError("categorical dimension needs arity >= 2")


Dimension = Continuous | Ordinal | Categorical


@dataclass(frozen=True)
class SearchSpace:
    """The optimization domain: a flat product of dimensions."""

    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if len(self.dims) < 1:
            raise ValueError("search space needs at least one dimension")

    @property
    def dim(self) -> int:
        return len(self.dims)

    @property
    def all_continuous(self) -> bool:
        return all(isinstance(d, Continuous) for d in self.dims)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-dimension numeric lower/upper bounds (ordinal: value range, categorical: code range)."""
        lo, hi = [], []
        for d in self.dims:
            if isinstance(d, Continuous):
                lo.append(d.lo)
                hi.append(d.hi)
            elif isinstance(d, Ordinal):
                lo.append(d.values[0])
                hi.append(d.values[-1])
            else:
                lo.append(0.0)
                hi.append(float(d.arity - 1))
        return np.array(lo), np.array(hi)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        for xi, d in zip(x, self.dims):
            if isinstance(d, Continuous):
                if not (d.lo <= xi <= d.hi):
                    return False
            elif isinstance(d, Ordinal):
                if not any(xi == v for v in d.values):
                    return False
            else:
                if xi != int(xi) or not (0 <= xi < d.arity):
                    return False
        return True

    def round_to_feasible(self, x) -> np.ndarray:
        """Clip continuous coordinates and snap discrete ones to their nearest allowed value."""
        x = np.asarray(x, dtype=float).copy()
        for i, d in enumerate(self.dims):
            if isinstance(d, Continuous):
                x[i] = min(max(x[i], d.lo), d.hi)
            elif isinstance(d, Ordinal):
                vals = np.asarray(d.values)
                x[i] = vals[np.argmin(np.abs(vals - x[i]))]
            else:
                x[i] = min(max(round(x[i]), 0), d.arity - 1)
        return x


class ObservationSet:
    """The append-only dataset of (x, y) pairs gathered during a run."""

    def __init__(self, xs=None, ys=None):
        self._xs: list[np.ndarray] = []
        self._ys: list[float] = []
        if xs is not None:
            for x, y in zip(xs, ys):
                self.append(x, y)

    def append(self, x, y: float) -> None:
        x = np.asarray(x, dtype=float)
        y = float(y)
        if not np.all(np.isfinite(x)) or not math.isfinite(y):
            raise ValueError("observations must be finite")
        self._xs.append(x)
        self._ys.append(y)

    def __len__(self) -> int:
        return len(self._ys)

    @property
    def xs(self) -> np.ndarray:
        return np.array(self._xs, dtype=float)

    @property
    def ys(self) -> np.ndarray:
        return np.array(self._ys, dtype=float)


@dataclass(frozen=True)
class LabeledSet:
    """Binary-classification view of an ObservationSet under a quantile threshold.

    Label 1 marks observations whose output fell at or below the threshold
    ``tau`` (the best ``gamma`` fraction); ties with ``tau`` are all labeled 1,
    so the positive count is at least ceil(gamma * N).
    """

    xs: np.ndarray
    zs: np.ndarray
    tau: float
    gamma: float

    def __len__(self) -> int:
        return len(self.zs)


def empirical_quantile(ys, gamma: float) -> float:
    """The k-th smallest of ``ys`` with k = ceil(gamma * N).

    Always an observed value, so the class of points at or below it is
    non-empty for any gamma in (0, 1).
    """
    ys = np.asarray(ys, dtype=float)
    if ys.size == 0:
        raise ValueError("empirical quantile of an empty sample")
    if not np.all(np.isfinite(ys)):
        raise ValueError("ys must be finite")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    k = math.ceil(gamma * ys.size)
    return float(np.sort(ys)[k - 1])


def assign_labels(obs: ObservationSet, gamma: float) -> LabeledSet:
    """Threshold the observations at the gamma-quantile and emit binary labels."""
    ys = obs.ys
    tau = empirical_quantile(ys, gamma)
    zs = (ys <= tau).astype(int)
    return LabeledSet(xs=obs.xs, zs=zs, tau=tau, gamma=float(gamma))


def uniform_sample(space: SearchSpace, count: int, seed) -> np.ndarray:
    """Draw ``count`` in-bounds points uniformly, one row per point.

    ``seed`` is an int or a numpy Generator; results are deterministic for a
    fixed seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    cols = []
    for d in space.dims:
        if isinstance(d, Continuous):
            cols.append(rng.uniform(d.lo, d.hi, size=count))
        elif isinstance(d, Ordinal):
            vals = np.asarray(d.values)
            cols.append(vals[rng.integers(0, len(vals), size=count)])
        else:
            cols.append(rng.integers(0, d.arity, size=count).astype(float))
    return np.column_stack(cols)
