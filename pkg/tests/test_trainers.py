import numpy as np
import pytest
from sklearn.base import clone

from crossplay import (PSRO, ConfigurationError, FictitiousCrossPlay, FictitiousSelfPlay,
                       FixedOpponent, OnlineDoubleOracle, ProductPolicy, RunRecord, SelfPlay,
                       TrainConfig, detect_plateau, make_motivating, make_sad,
                       run_fxp, run_psro, run_sp)
from crossplay.learners import LearnerState, step_stepwise_br


@pytest.fixture(scope="module")
def motivating():
    return make_motivating()


class TestRunRecord:
    def test_add_and_convergence(self):
        rec = RunRecord("sp", threshold=0.1)
        rec.add(0, 1.0)
        rec.add(5, 0.05)
        rec.add(5, 0.5)
        rec.add(9, -1e-17)
        assert rec.steps == [0, 5, 9]
        assert rec.exploitability == [1.0, 0.5, 0.0]
        assert rec.convergence_step == 9
        assert rec.value_at(7) == 0.5 and rec.total_steps == 9

    def test_steps_must_increase(self):
        rec = RunRecord("sp")
        rec.add(3, 1.0)
        with pytest.raises(ValueError):
            rec.add(2, 1.0)
        with pytest.raises(ValueError):
            rec.value_at(1)


class TestPlateau:
    def test_constant_history(self):
        pi = np.array([[0.5, 0.5]])
        assert not detect_plateau([pi] * 3, window=3)
        assert detect_plateau([pi] * 4, window=3)

    def test_oscillation(self):
        a, b = np.array([[0.4, 0.6]]), np.array([[0.6, 0.4]])
        assert not detect_plateau([a, b] * 20, tol=1e-3, window=5)

    def test_converged_stepwise_br_run(self):
        pi = np.array([[0.5, 0.5]])
        history = [pi]
        for _ in range(300):
            pi = step_stepwise_br(pi, np.array([[1.0, 0.0]]))
            history.append(pi)
        assert detect_plateau(history)

    def test_window_validation(self):
        with pytest.raises(ConfigurationError):
            detect_plateau([np.zeros(1)], window=0)


class TestSelfPlayFamily:
    def test_sp_stuck_on_motivating(self, motivating):
        rec = SelfPlay(total_steps=300).fit(motivating).record_
        assert rec.final_exploitability >= 1.4 and rec.convergence_step is None

    def test_constant_game_goes_to_action_zero(self):
        from crossplay import TeamGame
        game = TeamGame(team_size=2, action_count=2, utility=lambda x, y: 0.0)
        est = SelfPlay(total_steps=200).fit(game)
        assert np.allclose(est.policy_.dists[:, 0], 1.0)

    def test_fsp_eta_one_is_sp(self, motivating):
        sp = SelfPlay(total_steps=100, init="random", seed=3).fit(motivating)
        fsp = FictitiousSelfPlay(eta=1.0, total_steps=100, init="random", seed=3,
                                 evaluate_average=False).fit(motivating)
        assert np.array_equal(sp.policy_.dists, fsp.policy_.dists)
        assert sp.record_.exploitability == fsp.record_.exploitability

    def test_fixed_opponent_all_one(self, motivating):
        all1 = ProductPolicy.deterministic([1, 1, 1], 2)
        est = FixedOpponent(opponent=all1, total_steps=300).fit(motivating)
        assert np.allclose(est.policy_.dists[:, 0], 1.0)
        with pytest.raises(ConfigurationError):
            FixedOpponent().fit(motivating)

    def test_trajectory_and_eval_every(self, motivating):
        est = SelfPlay(total_steps=10, eval_every=4, keep_trajectory=True).fit(motivating)
        assert len(est.trajectory_) == 11
        assert est.record_.steps == [0, 4, 8, 10]

    def test_cfr_evaluates_average(self, motivating):
        est = SelfPlay(rule="cfr", total_steps=20).fit(motivating)
        assert est._averaged() and np.allclose(est.eval_joint_, est.average_joint_)


class TestPopulationTrainers:
    def test_psro_population_and_meta(self, motivating):
        est = PSRO(total_steps=200, steps_per_iter=40, plateau_window=10 ** 9).fit(motivating)
        assert len(est.population_) == 6
        assert est.record_.iteration_ends == [40, 80, 120, 160, 200]
        assert est.meta_weights_.sum() == pytest.approx(1.0)

    def test_psro_nash_improves(self, motivating):
        rec = PSRO(total_steps=400, plateau_tol=1e-3, plateau_window=5).fit(motivating).record_
        assert rec.final_exploitability <= rec.exploitability[0]

    def test_odo_weights_stay_on_simplex(self, motivating):
        est = OnlineDoubleOracle(total_steps=300, steps_per_iter=50).fit(motivating)
        w = est.meta_weights_
        assert np.all(w >= 0) and w.sum() == pytest.approx(1.0)
        assert len(w) == len(est.population_)

    def test_fxp_population_growth(self, motivating):
        est = FictitiousCrossPlay(total_steps=10 ** 6, steps_per_iter=30, max_iterations=4,
                                  plateau_window=10 ** 9).fit(motivating)
        assert len(est.main_population_) == len(est.counter_population_) == 5
        # both learners count toward the step axis
        assert est.record_.iteration_ends == [60, 120, 180, 240]
        assert len(est.meta_weights_) == 10

    def test_fxp_eta_one_main_is_self_play(self, motivating):
        fxp = FictitiousCrossPlay(eta=1.0, total_steps=10 ** 6, steps_per_iter=50,
                                  max_iterations=3, plateau_window=10 ** 9, init="random",
                                  seed=4).fit(motivating)
        rng = np.random.default_rng(4)
        from crossplay.learners import init_policy
        start = init_policy(3, 2, "random", rng)
        sp = SelfPlay(total_steps=150, init=start).fit(motivating)
        assert np.array_equal(fxp.main_population_[-1].dists, sp.policy_.dists)

    def test_fxp_eta_zero_first_iteration_matches_psro(self, motivating):
        kw = dict(steps_per_iter=40, plateau_window=10 ** 9, max_iterations=1,
                  total_steps=10 ** 6)
        fxp = FictitiousCrossPlay(eta=0.0, main_reset=True, main_solver="uniform",
                                  counter_solver="uniform", **kw).fit(motivating)
        psro = PSRO(meta_solver="uniform", **kw).fit(motivating)
        assert np.array_equal(fxp.main_population_[1].dists, psro.population_[1].dists)

    def test_fxp_eta_decay(self, motivating):
        est = FictitiousCrossPlay(eta=0.2, eta_decay=0.5, total_steps=10 ** 6, steps_per_iter=5,
                                  max_iterations=3, plateau_window=10 ** 9).fit(motivating)
        assert est.eta_history_ == pytest.approx([0.2, 0.1, 0.05])

    def test_prioritized_solver_runs(self, motivating):
        est = FictitiousCrossPlay(main_solver="prioritized", counter_solver="prioritized",
                                  total_steps=120, steps_per_iter=30).fit(motivating)
        assert est.meta_weights_.sum() == pytest.approx(1.0)

    def test_unknown_solver(self, motivating):
        with pytest.raises(ConfigurationError):
            PSRO(meta_solver="alpharank", total_steps=10).fit(motivating)


@pytest.mark.parametrize("cls", [SelfPlay, FictitiousSelfPlay, PSRO, OnlineDoubleOracle,
                                 FictitiousCrossPlay])
def test_determinism(cls, motivating):
    a = cls(total_steps=120, init="random", seed=7).fit(motivating).record_
    b = cls(total_steps=120, init="random", seed=7).fit(motivating).record_
    assert a.steps == b.steps and a.exploitability == b.exploitability


@pytest.mark.parametrize("cls", [SelfPlay, PSRO, FictitiousCrossPlay])
def test_sklearn_api(cls, motivating):
    est = cls(total_steps=50)
    copy = clone(est).set_params(lr=0.2)
    assert copy.get_params()["lr"] == 0.2 and est.get_params()["lr"] == 0.1
    assert copy.fit(motivating).score() == -copy.record_.final_exploitability


class TestValidation:
    @pytest.mark.parametrize("params", [{"total_steps": 0}, {"lr": 0.0}, {"rule": "adam"},
                                        {"agent_order": "random"}, {"eval_every": 1.5}])
    def test_bad_params(self, motivating, params):
        with pytest.raises(ConfigurationError):
            SelfPlay(**params).fit(motivating)

    def test_bad_eta(self, motivating):
        with pytest.raises(ConfigurationError):
            FictitiousCrossPlay(eta=1.5).fit(motivating)
        with pytest.raises(ConfigurationError):
            FictitiousSelfPlay(eta=-0.1).fit(motivating)


class TestAgentOrder:
    def test_sweep_updates_agents_in_turn(self):
        learner = LearnerState("stepwise_br", np.full((2, 2), 0.5), lr=1.0)
        seen = []

        def q_of(dists):
            seen.append(dists.copy())
            # each agent prefers the action its teammate is less likely to play
            return dists[::-1, ::-1].copy(), 0.0

        learner.sweep(q_of)
        assert learner.t == 1
        assert np.array_equal(seen[1][0], [1.0, 0.0])
        assert np.array_equal(learner.policy, [[1.0, 0.0], [0.0, 1.0]])

    def test_simultaneous_keeps_symmetric_team_symmetric(self):
        sad = make_sad()
        est = SelfPlay(total_steps=200).fit(sad)
        assert np.ptp(est.policy_.dists, axis=0).max() == 0.0

    def test_sequential_splits_roles_on_sad(self):
        sad = make_sad()
        est = PSRO(total_steps=700, agent_order="sequential").fit(sad)
        assert est.record_.convergence_step is not None
        roles = {tuple(np.argmax(p.dists, axis=1)) for p in est.population_[1:]}
        assert any(len(set(r)) > 1 for r in roles)


class TestTrainConfig:
    def test_estimator(self):
        tc = TrainConfig(game="motivating", algorithm="fxp", eta=0.2, steps_per_iter=30)
        est = tc.estimator()
        assert isinstance(est, FictitiousCrossPlay) and est.eta == 0.2
        assert est.steps_per_iter == 30

    def test_rejects_params_the_algorithm_lacks(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(algorithm="sp", eta=0.3).estimator()
        with pytest.raises(ConfigurationError):
            TrainConfig(algorithm="muzero")

    def test_run_wrappers(self):
        rec = run_sp(TrainConfig(algorithm="sp", total_steps=20))
        assert rec.algorithm == "sp" and rec.total_steps == 20
        rec = run_psro(TrainConfig(algorithm="psro", total_steps=20, steps_per_iter=10))
        assert rec.iteration_ends == [10, 20]
        with pytest.raises(ConfigurationError):
            run_fxp(TrainConfig(algorithm="sp"))
