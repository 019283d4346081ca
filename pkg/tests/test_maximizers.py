import numpy as np
import pytest

from borekit.maximizers import (
    DeParams,
    MaximizerBudget,
    maximize_de,
    maximize_gradient_multistart,
    maximize_random_search,
    suggest,
)
from borekit.mlp import MlpClassifier, MlpConfig
from borekit.space import Categorical, Continuous, Ordinal, SearchSpace, uniform_sample

UNIT = SearchSpace((Continuous(0.0, 1.0),))
CUBE = SearchSpace((Continuous(-5.0, 5.0),) * 3)


class CountingObjective:
    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.fn(x)


def bump_classifier(peak=0.6, slope=5.0):
    """Hand-built 1-d network whose output peaks exactly at ``peak``.

    Two relu units fold the axis around the peak; the negative output
    weight turns the fold into a single interior maximum.
    """
    clf = MlpClassifier(UNIT, MlpConfig(hidden_widths=(2,), activation="relu", seed=0))
    clf.weights[0][...] = np.array([[1.0, -1.0]])
    clf.biases[0][...] = np.array([-peak, peak])
    clf.weights[1][...] = np.array([[-slope], [-slope]])
    clf.biases[1][...] = np.array([0.0])
    return clf


class TestRandomSearch:
    def test_constant_objective(self):
        x, v = maximize_random_search(lambda p: 2.5, UNIT, MaximizerBudget(max_evals=10, seed=0))
        assert v == 2.5
        assert UNIT.contains(x)

    def test_quadratic_near_optimum_over_seeds(self):
        for seed in range(20):
            _, v = maximize_random_search(lambda p: -(p[0] - 0.5) ** 2, UNIT,
                                          MaximizerBudget(max_evals=500, seed=seed))
            assert v >= -0.01

    def test_deterministic_and_budget_exact(self):
        counter = CountingObjective(lambda p: float(np.sin(7 * p[0])))
        budget = MaximizerBudget(max_evals=77, seed=3)
        a = maximize_random_search(counter, UNIT, budget)
        assert counter.calls == 77
        b = maximize_random_search(counter, UNIT, budget)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]

    def test_value_matches_returned_point(self):
        fn = lambda p: float(np.cos(3 * p[0]))
        x, v = maximize_random_search(fn, UNIT, MaximizerBudget(max_evals=50, seed=1))
        assert v == fn(x)


class TestDifferentialEvolution:
    def test_sphere_convergence(self):
        vals = []
        for seed in range(10):
            _, v = maximize_de(lambda p: -float(np.sum(p ** 2)), CUBE,
                               MaximizerBudget(max_evals=2000, seed=seed))
            vals.append(v)
        assert np.median(vals) >= -1e-3

    def test_budget_equals_population_returns_best_initial(self):
        params = DeParams(population_size=20)
        budget = MaximizerBudget(max_evals=20, seed=5)
        fn = lambda p: float(p[0])
        x, v = maximize_de(fn, UNIT, budget, params)
        init = uniform_sample(UNIT, 20, seed=5)
        assert v == max(fn(p) for p in init)

    def test_monotone_objective(self):
        vals = [maximize_de(lambda p: float(p[0]), UNIT,
                            MaximizerBudget(max_evals=2000, seed=s))[1] for s in range(10)]
        assert np.median(vals) >= 0.99

    def test_eval_budget_respected(self):
        counter = CountingObjective(lambda p: float(-np.sum(p ** 2)))
        maximize_de(counter, CUBE, MaximizerBudget(max_evals=333, seed=0))
        assert counter.calls <= 333

    def test_improves_on_initial_population(self):
        fn = lambda p: float(np.sin(5 * p[0]) * np.cos(3 * p[0]))
        budget = MaximizerBudget(max_evals=400, seed=9)
        _, v = maximize_de(fn, UNIT, budget)
        init_best = max(fn(p) for p in uniform_sample(UNIT, 20, seed=9))
        assert v >= init_best

    def test_discrete_dims_rejected(self):
        space = SearchSpace((Continuous(0, 1), Categorical(3)))
        with pytest.raises(ValueError):
            maximize_de(lambda p: 0.0, space, MaximizerBudget(max_evals=100, seed=0))

    def test_params_validated(self):
        with pytest.raises(ValueError):
            DeParams(population_size=3)
        with pytest.raises(ValueError):
            DeParams(mutation=0.0)
        with pytest.raises(ValueError):
            DeParams(crossover=1.5)


class TestGradientMultistart:
    def test_finds_interior_peak(self):
        clf = bump_classifier(peak=0.6)
        x, v = maximize_gradient_multistart(clf, UNIT, seed=0)
        assert abs(x[0] - 0.6) < 1e-3

    def test_flat_classifier_returns_first_start(self):
        clf = MlpClassifier(UNIT, MlpConfig(seed=0))  # zero output layer: flat 0.5
        x, v = maximize_gradient_multistart(clf, UNIT, restarts=3, seed=42)
        starts = uniform_sample(UNIT, 3, seed=42)
        assert v == 0.5
        assert x[0] == starts[0][0]

    def test_every_restart_improves(self):
        rng = np.random.default_rng(2)
        clf = MlpClassifier(UNIT, MlpConfig(activation="elu", seed=2))
        clf.set_flat_params(rng.normal(0, 1.0, clf.get_flat_params().shape))
        for seed in range(5):
            start = uniform_sample(UNIT, 1, seed=seed)[0]
            x, v = maximize_gradient_multistart(clf, UNIT, restarts=1, seed=seed)
            assert v >= clf.predict(start)

    def test_requires_input_gradients(self):
        class Opaque:
            def predict(self, x):
                return 0.5

        with pytest.raises(ValueError):
            maximize_gradient_multistart(Opaque(), UNIT, seed=0)

    def test_requires_continuous_space(self):
        clf = MlpClassifier(SearchSpace((Categorical(3),)))
        with pytest.raises(ValueError):
            maximize_gradient_multistart(clf, SearchSpace((Categorical(3),)), seed=0)


class TestSuggest:
    def test_mixed_space_takes_random_search_path(self):
        space = SearchSpace((Continuous(0, 1), Categorical(3)))
        clf = MlpClassifier(space, MlpConfig(seed=0))
        x = suggest(clf, space, MaximizerBudget(max_evals=50, seed=0))
        assert space.contains(x)

    def test_continuous_space_uses_gradients(self):
        clf = bump_classifier(peak=0.3)
        x = suggest(clf, UNIT, MaximizerBudget(seed=1))
        assert abs(x[0] - 0.3) < 1e-3

    def test_ordinal_rounding_post_hoc(self):
        space = SearchSpace((Ordinal((0.0, 0.25, 0.5, 0.75, 1.0)),))

        class Linear:
            def predict(self, x):
                return float(x[0])

        x = suggest(Linear(), space, MaximizerBudget(method="random_search",
                                                     max_evals=64, seed=0))
        assert x[0] in {0.0, 0.25, 0.5, 0.75, 1.0}

    def test_explicit_method_override(self):
        clf = bump_classifier(peak=0.5)
        x = suggest(clf, UNIT, MaximizerBudget(method="random_search", max_evals=200, seed=0))
        assert UNIT.contains(x)

    def test_flat_classifier_suggestions_cover_domain(self):
        clf = MlpClassifier(UNIT, MlpConfig(seed=0))
        thirds = [0, 0, 0]
        for call in range(200):
            x = suggest(clf, UNIT, MaximizerBudget(seed=call))
            thirds[min(int(x[0] * 3), 2)] += 1
        assert all(count >= 40 for count in thirds)
