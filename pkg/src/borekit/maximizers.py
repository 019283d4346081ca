"""Acquisition maximizers: random search, differential evolution, and
multi-start projected gradient ascent for differentiable classifiers.

``suggest`` picks the maximizer for a trained classifier: gradient ascent
when the classifier exposes input gradients on an all-continuous space,
differential evolution on continuous spaces otherwise, and random search
when discrete dimensions are present. Ordinal coordinates of the winning
point are snapped to their nearest allowed value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import SearchSpace, uniform_sample

__all__ = [
    "MaximizerBudget",
    "DeParams",
    "maximize_random_search",
    "maximize_de",
    "maximize_gradient_multistart",
    "suggest",
]

MAXIMIZER_METHODS = ("auto", "random_search", "differential_evolution", "gradient_multistart")


@dataclass
class MaximizerBudget:
    method: str = "auto"
    max_evals: int = 500
    seed: int | None = None

    def __post_init__(self):
        if self.method not in MAXIMIZER_METHODS:
            raise ValueError(f"unknown maximizer method {self.method!r}")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")


@dataclass
class DeParams:
    population_size: int = 20
    mutation: float = 0.5
    crossover: float = 0.9

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("rand/1/bin needs a population of at least 4")
        if not 0.0 < self.mutation <= 2.0:
            raise ValueError("mutation factor must lie in (0, 2]")
        if not 0.0 <= self.crossover <= 1.0:
            raise ValueError("crossover rate must lie in [0, 1]")


def maximize_random_search(objective, space: SearchSpace, budget: MaximizerBudget):
    """Evaluate ``max_evals`` uniform points; return the first-best (point, value)."""
    points = uniform_sample(space, budget.max_evals, budget.seed)
    values = np.array([float(objective(p)) for p in points])
    i = int(np.argmax(values))
    return points[i], float(values[i])


def maximize_de(objective, space: SearchSpace, budget: MaximizerBudget,
                params: DeParams | None = None):
    """rand/1/bin differential evolution on an all-continuous space.

    Spends at most ``max_evals`` objective evaluations (including the initial
    population) and never returns less than the best initial individual.
    """
    if not space.all_continuous:
        raise ValueError("differential evolution requires an all-continuous space")
    params = params or DeParams()
    if budget.max_evals < params.population_size:
        raise ValueError("budget must cover at least the initial population")
    lo, hi = space.bounds()
    d = space.dim
    rng = np.random.default_rng(budget.seed)

    pop = uniform_sample(space, params.population_size, rng)
    fitness = np.array([float(objective(p)) for p in pop])
    evals = params.population_size

    while evals < budget.max_evals:
        for i in range(params.population_size):
            if evals >= budget.max_evals:
                break
            choices = [k for k in range(params.population_size) if k != i]
            r1, r2, r3 = rng.choice(choices, size=3, replace=False)
            mutant = pop[r1] + params.mutation * (pop[r2] - pop[r3])
            mutant = np.clip(mutant, lo, hi)
            cross = rng.random(d) < params.crossover
            cross[rng.integers(d)] = True
            trial = np.where(cross, mutant, pop[i])
            value = float(objective(trial))
            evals += 1
            if value >= fitness[i]:
                pop[i] = trial
                fitness[i] = value

    i = int(np.argmax(fitness))
    return pop[i].copy(), float(fitness[i])


def maximize_gradient_multistart(classifier, space: SearchSpace, restarts: int = 3,
                                 seed=None, max_iters: int = 200, step_tol: float = 1e-6):
    """Projected gradient ascent with backtracking from uniform restarts.

    The classifier must expose ``input_gradient``; every restart's endpoint
    value is at least its start value, and ties across restarts go to the
    first.
    """
    if not hasattr(classifier, "input_gradient"):
        raise ValueError("classifier does not expose input gradients")
    if not space.all_continuous:
        raise ValueError("gradient ascent requires an all-continuous space")
    lo, hi = space.bounds()
    width = float(np.max(hi - lo))
    starts = uniform_sample(space, restarts, seed)

    best_x, best_v = None, -np.inf
    for x0 in starts:
        x = x0.copy()
        fx = float(classifier.predict(x))
        step = width
        for _ in range(max_iters):
            g = classifier.input_gradient(x)
            if float(np.linalg.norm(g)) == 0.0:
                break
            t = step
            accepted = False
            while True:
                xn = np.clip(x + t * g, lo, hi)
                if float(np.linalg.norm(xn - x)) < step_tol:
                    break
                fn = float(classifier.predict(xn))
                if fn > fx:
                    x, fx = xn, fn
                    step = min(2.0 * t, width)
                    accepted = True
                    break
                t /= 2.0
            if not accepted:
                break
        if fx > best_v:
            best_x, best_v = x, fx
    return best_x, best_v


def suggest(classifier, space: SearchSpace, budget: MaximizerBudget,
            de_params: DeParams | None = None) -> np.ndarray:
    """Maximize the classifier output over the space and return the candidate."""
    method = budget.method
    if method == "auto":
        if hasattr(classifier, "input_gradient") and space.all_continuous:
            method = "gradient_multistart"
        elif space.all_continuous:
            method = "differential_evolution"
        else:
            method = "random_search"

    if method == "gradient_multistart":
        x, _ = maximize_gradient_multistart(classifier, space, seed=budget.seed)
    elif method == "differential_evolution":
        x, _ = maximize_de(classifier.predict, space, budget, de_params)
    else:
        x, _ = maximize_random_search(classifier.predict, space, budget)
    return space.round_to_feasible(x)
