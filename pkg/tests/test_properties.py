import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from crossplay import (MixturePolicy, ProductPolicy, expected_utility, make_motivating, make_sad,
                       make_team_rps, run_experiment, solve_nash_zero_sum, team_exploitability)
from crossplay.learners import RULES, LearnerState

GAMES = {"motivating": make_motivating(), "team_rps": make_team_rps(), "sad": make_sad()}

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def random_product(rng, game):
    return ProductPolicy(rng.dirichlet(np.ones(game.action_count), size=game.team_size))


@pytest.mark.parametrize("rule", RULES)
def test_simplex_preservation(rule):
    rng = np.random.default_rng(0)
    learner = LearnerState(rule, rng.dirichlet(np.ones(4), size=3))
    for _ in range(10_000):
        q = rng.normal(scale=rng.choice([0.01, 1.0, 10.0]), size=(3, 4))
        pi = learner.step(q, float(rng.normal()))
        assert np.all(pi >= 0) and np.all(np.isfinite(pi))
        assert np.allclose(pi.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("name", sorted(GAMES))
def test_antisymmetry(name):
    game = GAMES[name]
    rng = np.random.default_rng(1)
    n, a = game.team_size, game.action_count
    for _ in range(1000):
        x, y = tuple(rng.integers(0, a, n)), tuple(rng.integers(0, a, n))
        assert game.payoff(x, y) + game.payoff(y, x) == 0
    m = game.matrix
    assert np.array_equal(m, -m.T)


@pytest.mark.parametrize("name", sorted(GAMES))
def test_identical_mixtures_are_even(name):
    game = GAMES[name]
    rng = np.random.default_rng(2)
    mix = MixturePolicy([random_product(rng, game) for _ in range(3)], [0.2, 0.3, 0.5])
    assert expected_utility(game, mix, mix) == pytest.approx(0.0, abs=1e-12)


def test_nash_certificates_on_random_matrices():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m, n = rng.integers(1, 9, size=2)
        a = rng.normal(size=(m, n))
        row, col, value = solve_nash_zero_sum(a)
        # exhaustive scan over pure deviations of both players
        row_dev = max(float(a[i] @ col) for i in range(m))
        col_dev = min(float(row @ a[:, j]) for j in range(n))
        assert row_dev - col_dev <= 1e-6
        assert row_dev - value <= 1e-6 and value - col_dev <= 1e-6


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=finite))
def test_nash_certificate_property(a):
    row, col, _ = solve_nash_zero_sum(a)
    assert np.max(a @ col) - np.min(row @ a) <= 1e-6
    assert np.all(row >= 0) and row.sum() == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 1))
def test_bilinearity(seed, w):
    game = GAMES["motivating"]
    rng = np.random.default_rng(seed)
    a, b, c = (random_product(rng, game) for _ in range(3))
    mixed = expected_utility(game, MixturePolicy([a, b], [w, 1 - w]), c)
    split = w * expected_utility(game, a, c) + (1 - w) * expected_utility(game, b, c)
    assert mixed == pytest.approx(split, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(sorted(GAMES)))
def test_exploitability_non_negative(seed, name):
    game = GAMES[name]
    rng = np.random.default_rng(seed)
    assert team_exploitability(game, random_product(rng, game)) >= -1e-12
    assert team_exploitability(game, random_product(rng, game),
                               random_product(rng, game)) >= -1e-12


@pytest.mark.parametrize("algorithm", ["sp", "fsp", "psro", "odo", "fxp"])
def test_same_seed_same_csv(tmp_path, algorithm):
    hyper = {} if algorithm in ("sp", "fsp") else {"steps_per_iter": 25}
    cfg = {"game": {"id": "motivating"}, "seeds": [5], "total_steps": 100,
           "algorithm": {"id": algorithm, "hyperparams": hyper}}
    cfg_random = dict(cfg, algorithm={"id": algorithm, "hyperparams": dict(hyper, init="random")})
    for name, doc in (("u", cfg), ("r", cfg_random)):
        run_experiment(doc, tmp_path / f"{name}1")
        run_experiment(doc, tmp_path / f"{name}2")
        first = (tmp_path / f"{name}1" / f"{algorithm}_seed5.csv").read_bytes()
        assert first == (tmp_path / f"{name}2" / f"{algorithm}_seed5.csv").read_bytes()
