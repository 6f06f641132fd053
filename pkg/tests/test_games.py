import json

import numpy as np
import pytest

from crossplay import (ConfigurationError, MixturePolicy, MotivatingParams, ProductPolicy,
                       SadParams, compute_q, expected_utility, load_matrix_game, make_game,
                       make_motivating, make_sad, make_team_rps, motivating_delta_q,
                       sad_exploitability, sad_reference_policies, team_exploitability)
from crossplay.games import PAPER, ROCK, SCISSORS, rps_team_move, sad_team_reward, \
    team_move_distribution


@pytest.fixture(scope="module")
def sad():
    return make_sad()


class TestTeamRps:
    def test_team_moves(self):
        assert rps_team_move((0, 0)) == ROCK
        assert rps_team_move((0, 1)) == PAPER
        assert rps_team_move((1, 0)) == PAPER
        assert rps_team_move((1, 1)) == SCISSORS

    def test_payoffs(self):
        g = make_team_rps()
        assert g.payoff((0, 0), (1, 1)) == 1.0   # Rock beats Scissors
        assert g.payoff((0, 1), (1, 0)) == 0.0   # Paper ties Paper
        assert g.payoff((1, 1), (0, 1)) == 1.0   # Scissors beats Paper
        assert g.payoff((0, 1), (0, 0)) == 1.0   # Paper beats Rock

    def test_move_distribution(self):
        pi = ProductPolicy([[0.5, 0.5], [0.5, 0.5]])
        assert np.allclose(team_move_distribution(pi), [0.25, 0.5, 0.25])
        mix = MixturePolicy([ProductPolicy.deterministic([0, 0], 2),
                             ProductPolicy.deterministic([1, 1], 2)], [0.4, 0.6])
        assert np.allclose(team_move_distribution(mix), [0.4, 0.0, 0.6])


class TestMotivating:
    def test_payoff_cases(self):
        g = make_motivating()
        assert g.payoff((0, 0, 0), (1, 1, 1)) == pytest.approx(1.5)
        assert g.payoff((0, 0, 0), (1, 1, 0)) == pytest.approx(0.2)
        assert g.payoff((1, 0, 0), (1, 1, 0)) == -1.0
        assert g.payoff((1, 1, 1), (0, 0, 0)) == pytest.approx(-1.5)
        assert g.payoff((1, 1, 0), (0, 0, 0)) == pytest.approx(-0.2)

    def test_params_validation(self):
        for bad in ({"eps": 0.0}, {"C": 0.05}, {"C": 3.0}, {"N": 1}):
            with pytest.raises(ConfigurationError):
                MotivatingParams(**bad)

    def test_delta_q_examples(self):
        p = MotivatingParams()
        all1 = ProductPolicy.deterministic([1, 1, 1], 2)
        zeros = [[1.0, 0.0], [1.0, 0.0]]
        ones = [[0.0, 1.0], [0.0, 1.0]]
        assert motivating_delta_q(p, zeros, all1) == pytest.approx(3.5)
        assert motivating_delta_q(p, ones, all1) == pytest.approx(-1.0)
        a = np.sqrt(1 / (p.N + p.C))
        at_threshold = [[a, 1 - a], [a, 1 - a]]
        assert motivating_delta_q(p, at_threshold, all1) == pytest.approx(0.0, abs=1e-12)

    def test_delta_q_matches_brute_force(self):
        p = MotivatingParams(N=4, C=2.0, eps=0.3)
        g = make_motivating(p)
        rng = np.random.default_rng(1)
        for _ in range(20):
            pi = ProductPolicy(rng.dirichlet([1, 1], size=4))
            mu = ProductPolicy(rng.dirichlet([1, 1], size=4))
            q = compute_q(g, pi, mu)
            for i in range(4):
                mates = np.delete(pi.dists, i, axis=0)
                assert q[i, 0] - q[i, 1] == pytest.approx(
                    motivating_delta_q(p, mates, mu), abs=1e-12)

    def test_q_against_all_ones(self):
        g = make_motivating()
        all1 = ProductPolicy.deterministic([1, 1, 1], 2)
        q = compute_q(g, all1, all1)
        assert np.allclose(q, [[-1.0, 0.0]] * 3)


class TestSad:
    def test_params(self):
        p = SadParams()
        assert (p.attack, p.defend, p.action_count) == (5, 6, 7)
        assert p.rewards == (0.0, 1.0, 2.0, 3.0, 4.0)
        with pytest.raises(ConfigurationError):
            SadParams(rewards=(0, 2, 1, 3, 4))
        with pytest.raises(ConfigurationError):
            SadParams(rewards=(1, 2, 3, 4, 5))
        with pytest.raises(ConfigurationError):
            SadParams(A=2, rewards=(0, 1))

    def test_team_reward_rules(self):
        p = SadParams()
        atk, dfd = p.attack, p.defend
        assert sad_team_reward(p, (4, 4, 4, 4), (1, 1, 1, 1)) == 16.0
        # seeking actions more than one apart reset the level to 0, so only
        # agents seeking 0 or 1 still count
        assert sad_team_reward(p, (1, 3, 3, 3), (1, 1, 1, 1)) == 1.0
        assert sad_team_reward(p, (2, 4, 4, 4), (1, 1, 1, 1)) == 0.0
        assert sad_team_reward(p, (2, 3, 3, dfd), (1, 1, 1, 1)) == 8.0
        # undefended team facing two attackers loses everything
        assert sad_team_reward(p, (4, 4, 4, 4), (atk, atk, 4, 4)) == 0.0
        assert sad_team_reward(p, (4, 4, 4, 4), (atk, 4, 4, 4)) == 16.0
        assert sad_team_reward(p, (dfd, 4, 4, 4), (atk, atk, 4, 4)) == 12.0
        # no seekers at all earns nothing
        assert sad_team_reward(p, (atk, atk, dfd, dfd), (4, 4, 4, 4)) == 0.0

    def test_reference_head_to_head(self, sad):
        seek, attack, defend, _ = sad_reference_policies()
        refs = [seek, attack, defend]
        table = [[expected_utility(sad, a, b) for b in refs] for a in refs]
        assert np.allclose(table, [[0, -8, 4], [8, 0, -4], [-4, 4, 0]])

    def test_sigma_star_is_equilibrium(self, sad):
        seek, _, defend, sigma = sad_reference_policies()
        assert np.allclose(sigma.weights, [0.25, 0.25, 0.5])
        assert expected_utility(sad, seek, sigma) == pytest.approx(0.0)
        assert expected_utility(sad, defend, sigma) == pytest.approx(0.0)
        assert team_exploitability(sad, sigma) == pytest.approx(0.0, abs=1e-12)

    def test_exploitability_examples(self, sad):
        p = SadParams()
        seek, _, defend, sigma = sad_reference_policies(p)
        assert sad_exploitability(p, sigma, sad) == pytest.approx(0.0, abs=1e-12)
        assert sad_exploitability(p, seek, sad) == 8.0
        assert sad_exploitability(p, defend, sad) == 4.0

    def test_matrix_matches_reward_definition(self, sad):
        p = sad.params
        rng = np.random.default_rng(5)
        for _ in range(300):
            x, y = tuple(rng.integers(0, 7, 4)), tuple(rng.integers(0, 7, 4))
            expect = sad_team_reward(p, x, y) - sad_team_reward(p, y, x)
            assert sad.payoff(x, y) == expect

    def test_agent_permutation_invariance(self, sad):
        rng = np.random.default_rng(6)
        for _ in range(100):
            x, y = rng.integers(0, 7, 4), tuple(rng.integers(0, 7, 4))
            assert sad.payoff(tuple(rng.permutation(x)), y) == sad.payoff(tuple(x), y)

    def test_reference_policies_need_three_agents(self):
        with pytest.raises(ConfigurationError):
            sad_reference_policies(SadParams(N=2))


class TestLoaders:
    def test_matrix_game_from_dict(self):
        g = load_matrix_game({"team_size": 1, "action_count": 2, "utility": [[0, 1], [-1, 0]]})
        assert g.symmetric and g.payoff((0,), (1,)) == 1.0

    def test_matrix_game_from_file(self, tmp_path):
        path = tmp_path / "g.json"
        path.write_text(json.dumps({"team_size": 1, "action_count": 2,
                                    "utility": [[1, -1], [-1, 2]]}))
        g = load_matrix_game(path)
        assert not g.symmetric
        assert g.payoff((1,), (1,)) == 2.0

    def test_matrix_game_rejects_bad_input(self):
        with pytest.raises(ConfigurationError):
            load_matrix_game({"team_size": 1, "action_count": 2, "utility": [[0, 1], [-1, 0]],
                              "extra": 1})
        with pytest.raises(ConfigurationError):
            load_matrix_game({"team_size": 1, "utility": [[0]]})
        with pytest.raises(ConfigurationError):
            load_matrix_game({"team_size": 1, "action_count": 2, "utility": [[0, 1]]})

    def test_make_game(self):
        assert make_game("motivating", N=4).team_size == 4
        assert make_game("sad", N=3, A=2).action_count == 5
        assert make_game("team_rps").n_joint == 4
        with pytest.raises(ConfigurationError):
            make_game("chess")
