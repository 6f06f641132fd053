"""Training loops for self-play, fictitious play, PSRO, online double oracle
and fictitious cross-play on team matrix games.

Every trainer is a scikit-learn style estimator: hyperparameters go to
``__init__``, ``fit(game)`` runs the loop and stores fitted attributes with a
trailing underscore (``record_``, ``policy_``, ``eval_policy_``, ...).
Policies are tracked as ``(team_size, action_count)`` arrays internally and
the opponent of every learner is summarised by its joint-action distribution,
which is all that exact Q-values need.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .game import MixturePolicy, ProductPolicy, TeamGame
from .games import SadParams, sad_reference_policies
from .learners import (DEFAULT_LR, MWU_K, REPLICATOR_DT, RULES, LearnerState, init_policy,
                       q_from_joint)
from .meta import PayoffTable, prioritized_scores_counter, prioritized_scores_main, \
    solve_nash_zero_sum, solve_uniform
from .validation import ConfigurationError, check_interval, check_positive_int

logger = logging.getLogger(__name__)

CONVERGENCE_THRESHOLD = 1e-2
PLATEAU_TOL = 1e-6
PLATEAU_WINDOW = 20
AGENT_ORDERS = ("simultaneous", "sequential")


@dataclass
class RunRecord:
    """Evaluation time series of one training run."""

    algorithm: str
    steps: list = field(default_factory=list)
    exploitability: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    threshold: float = CONVERGENCE_THRESHOLD
    populations: dict = field(default_factory=dict)
    meta_policies: dict = field(default_factory=dict)
    iteration_ends: list = field(default_factory=list)

    def add(self, step: int, value: float, snapshot=None):
        value = max(float(value), 0.0)
        if self.steps and step == self.steps[-1]:
            self.exploitability[-1] = value
            if snapshot is not None:
                self.snapshots[-1] = snapshot
            return
        if self.steps and step < self.steps[-1]:
            raise ValueError("record steps must increase")
        self.steps.append(int(step))
        self.exploitability.append(value)
        self.snapshots.append(snapshot)

    @property
    def convergence_step(self) -> Optional[int]:
        for s, e in zip(self.steps, self.exploitability):
            if e <= self.threshold:
                return s
        return None

    @property
    def final_exploitability(self) -> float:
        return self.exploitability[-1]

    @property
    def total_steps(self) -> int:
        return self.steps[-1] if self.steps else 0

    def value_at(self, step: int) -> float:
        """Exploitability recorded at the last evaluation point not after ``step``."""
        idx = np.searchsorted(self.steps, step, side="right") - 1
        if idx < 0:
            raise ValueError(f"no evaluation at or before step {step}")
        return self.exploitability[idx]


def detect_plateau(history, tol: float = PLATEAU_TOL, window: int = PLATEAU_WINDOW) -> bool:
    """True when the last ``window`` consecutive policy changes were all below ``tol``.

    Change is the largest absolute per-agent probability difference.
    """
    check_positive_int("window", window)
    history = [np.asarray(p.dists if isinstance(p, ProductPolicy) else p) for p in history]
    if len(history) < window + 1:
        return False
    recent = history[-(window + 1):]
    return all(np.max(np.abs(b - a)) < tol for a, b in zip(recent, recent[1:]))


class _PlateauTracker:
    def __init__(self, tol, window):
        self.tol, self.window, self.calm = tol, window, 0

    def update(self, old, new) -> bool:
        self.calm = self.calm + 1 if np.max(np.abs(new - old)) < self.tol else 0
        return self.calm >= self.window


class _Evaluator:
    """Exploitability of a joint-action distribution under the chosen metric."""

    def __init__(self, game: TeamGame, metric="auto"):
        if metric == "auto":
            sad = isinstance(game.params, SadParams) and game.params.N >= 3
            metric = "sad" if sad else "team"
        self.metric = metric
        if metric == "team":
            self._fn = lambda q: float(np.max(game.values(q)) + np.max(-game.row_values(q)))
        elif metric == "sad":
            if not isinstance(game.params, SadParams):
                raise ConfigurationError("the sad metric needs a SAD game")
            refs = sad_reference_policies(game.params)[:3]
            rows = game.row_values(np.array([r.joint() for r in refs]))
            self._fn = lambda q: float(np.maximum(rows @ q, 0.0).sum())
        elif callable(metric):
            self._fn = lambda q: float(metric(game, q))
        else:
            raise ConfigurationError(f"unknown metric {metric!r}")

    def __call__(self, joint: np.ndarray) -> float:
        return self._fn(joint)


def _joint(dists: np.ndarray) -> np.ndarray:
    p = dists[0]
    for d in dists[1:]:
        p = np.outer(p, d).ravel()
    return p


class _BaseTrainer(BaseEstimator):
    """Shared machinery; subclasses implement ``_run``.

    ``agent_order="simultaneous"`` updates all agents of a team from the same
    Q-values. ``"sequential"`` updates them one at a time, each agent seeing
    its teammates' new policies; this is what lets identical agents take
    different roles, since simultaneous updates keep a symmetric team symmetric.
    """

    algorithm = "base"

    def _check_common(self):
        check_positive_int("total_steps", self.total_steps)
        check_positive_int("eval_every", self.eval_every)
        if self.rule not in RULES:
            raise ConfigurationError(f"unknown update rule {self.rule!r}")
        check_interval("lr", self.lr, 0.0, 1.0, low_open=True)
        if self.agent_order not in AGENT_ORDERS:
            raise ConfigurationError(
                f"agent_order must be one of {AGENT_ORDERS}, got {self.agent_order!r}")

    def _new_learner(self, policy) -> LearnerState:
        return LearnerState(self.rule, policy, lr=self.lr, dt=self.dt, k=self.k)

    def _learn(self, learner: LearnerState, opp_value: np.ndarray) -> np.ndarray:
        """One learner step against the opponent's joint value tensor."""
        def q_of(dists):
            return _q_from_tensor(opp_value, dists), float(_joint(dists) @ opp_value.ravel())

        if self.agent_order == "sequential":
            return learner.sweep(q_of)
        return learner.step(*q_of(learner.policy))

    def _init(self, game, rng):
        return init_policy(game.team_size, game.action_count, self.init, rng)

    def fit(self, game: TeamGame, y=None):
        self._check_common()
        self.game_ = game
        self.rng_ = np.random.default_rng(self.seed)
        self.evaluator_ = _Evaluator(game, self.metric)
        self.record_ = RunRecord(self.algorithm, threshold=self.convergence_threshold)
        self._run(game)
        return self

    def _record(self, step, joint, snapshot=None, force=False):
        if force or step % self.eval_every == 0:
            self.record_.add(step, self.evaluator_(joint), snapshot)

    def score(self, game: TeamGame = None, y=None) -> float:
        """Negative final exploitability (higher is better)."""
        return -self.record_.final_exploitability

    @property
    def convergence_step_(self):
        return self.record_.convergence_step


class SelfPlay(_BaseTrainer):
    """Self-play with any of the tabular update rules.

    The opponent at every step is the learner's own current policy. CFR runs
    are evaluated on the time-average mixture, the others on the current policy.
    """

    algorithm = "sp"

    def __init__(self, rule="stepwise_br", total_steps=1000, lr=DEFAULT_LR, dt=REPLICATOR_DT,
                 k=MWU_K, init="uniform", seed=0, eval_every=1, metric="auto",
                 convergence_threshold=CONVERGENCE_THRESHOLD, evaluate_average=None,
                 keep_trajectory=False, agent_order="simultaneous"):
        self.rule = rule
        self.total_steps = total_steps
        self.lr = lr
        self.dt = dt
        self.k = k
        self.init = init
        self.seed = seed
        self.eval_every = eval_every
        self.metric = metric
        self.convergence_threshold = convergence_threshold
        self.evaluate_average = evaluate_average
        self.keep_trajectory = keep_trajectory
        self.agent_order = agent_order

    def _opponent(self, current_joint, history_sum, t):
        return current_joint

    def _averaged(self):
        if self.evaluate_average is None:
            return self.rule == "cfr"
        return self.evaluate_average

    def _run(self, game):
        learner = self._new_learner(self._init(game, self.rng_))
        shape = (game.action_count,) * game.team_size
        average = self._averaged()
        joint = _joint(learner.policy)
        history_sum = joint.copy()
        self.trajectory_ = []
        self._record(0, history_sum if average else joint, learner.policy.copy(), force=True)
        for t in range(1, self.total_steps + 1):
            opp = self._opponent(joint, history_sum, t)
            opp_value = game.values(opp).reshape(shape)
            if self.keep_trajectory:
                self.trajectory_.append((learner.policy.copy(),
                                         _q_from_tensor(opp_value, learner.policy)))
            self._learn(learner, opp_value)
            joint = _joint(learner.policy)
            history_sum += joint
            target = history_sum / (t + 1) if average else joint
            self._record(t, target, learner.policy.copy(), force=t == self.total_steps)
        if self.keep_trajectory:
            self.trajectory_.append((learner.policy.copy(), q_from_joint(
                game, learner.policy, self._opponent(joint, history_sum, self.total_steps + 1))))
        self.policy_ = ProductPolicy(learner.policy)
        self.average_joint_ = history_sum / (self.total_steps + 1)
        self.eval_joint_ = self.average_joint_ if average else joint


class FictitiousSelfPlay(SelfPlay):
    """Self-play against ``eta * current + (1 - eta) * average of past policies``.

    Evaluated on the time-average policy.
    """

    algorithm = "fsp"

    def __init__(self, eta=0.3, rule="stepwise_br", total_steps=1000, lr=DEFAULT_LR,
                 dt=REPLICATOR_DT, k=MWU_K, init="uniform", seed=0, eval_every=1, metric="auto",
                 convergence_threshold=CONVERGENCE_THRESHOLD, evaluate_average=True,
                 keep_trajectory=False, agent_order="simultaneous"):
        super().__init__(rule=rule, total_steps=total_steps, lr=lr, dt=dt, k=k, init=init,
                         seed=seed, eval_every=eval_every, metric=metric,
                         convergence_threshold=convergence_threshold,
                         evaluate_average=evaluate_average, keep_trajectory=keep_trajectory,
                         agent_order=agent_order)
        self.eta = eta

    def _check_common(self):
        super()._check_common()
        check_interval("eta", self.eta, 0.0, 1.0)

    def _opponent(self, current_joint, history_sum, t):
        # history_sum holds pi^1..pi^t at step t
        return self.eta * current_joint + (1.0 - self.eta) * history_sum / t


class FixedOpponent(SelfPlay):
    """Learn against a fixed opponent policy (the PSRO best-response subproblem)."""

    algorithm = "fixed"

    def __init__(self, opponent=None, rule="stepwise_br", total_steps=1000, lr=DEFAULT_LR,
                 dt=REPLICATOR_DT, k=MWU_K, init="uniform", seed=0, eval_every=1,
                 metric="auto", convergence_threshold=CONVERGENCE_THRESHOLD,
                 keep_trajectory=False, agent_order="simultaneous"):
        super().__init__(rule=rule, total_steps=total_steps, lr=lr, dt=dt, k=k, init=init,
                         seed=seed, eval_every=eval_every, metric=metric,
                         convergence_threshold=convergence_threshold, evaluate_average=False,
                         keep_trajectory=keep_trajectory, agent_order=agent_order)
        self.opponent = opponent

    def _run(self, game):
        if self.opponent is None:
            raise ConfigurationError("FixedOpponent needs an opponent policy")
        opp = self.opponent
        self._opp_joint = opp.joint() if hasattr(opp, "joint") else np.asarray(opp, float)
        super()._run(game)

    def _opponent(self, current_joint, history_sum, t):
        return self._opp_joint


class _PopulationTrainer(_BaseTrainer):
    """Helpers for trainers that grow populations of best responses."""

    def _check_population(self):
        check_positive_int("steps_per_iter", self.steps_per_iter)
        check_positive_int("plateau_window", self.plateau_window)

    def _solve(self, solver, table: PayoffTable, current=None):
        if solver == "uniform":
            w = solve_uniform(table)
            return w, np.full(table.shape[1], 1.0 / table.shape[1])
        if solver == "nash":
            row, col, _ = solve_nash_zero_sum(table, tol=self.nash_tol)
            return row, col
        if solver == "prioritized":
            if current is None:
                raise ConfigurationError("prioritized sampling needs the current policy")
            return (prioritized_scores_main(self.game_, current, table.rows),
                    prioritized_scores_counter(self.game_, current, table.cols))
        raise ConfigurationError(f"unknown meta-solver {solver!r}")


class PSRO(_PopulationTrainer):
    """Policy-space response oracles with a uniform or Nash meta-solver.

    Each iteration trains one policy against the meta-policy mixture until it
    plateaus or ``steps_per_iter`` steps elapse, then appends it. With
    ``reset=True`` the new policy starts from a fresh initialisation, otherwise
    from the previous iteration's policy. The meta-policy mixture is evaluated.
    """

    algorithm = "psro"

    def __init__(self, meta_solver="nash", reset=True, total_steps=1000, steps_per_iter=1000,
                 plateau_tol=PLATEAU_TOL, plateau_window=PLATEAU_WINDOW, rule="stepwise_br",
                 lr=DEFAULT_LR, dt=REPLICATOR_DT, k=MWU_K, init="uniform", seed=0, eval_every=1,
                 metric="auto", convergence_threshold=CONVERGENCE_THRESHOLD, nash_tol=1e-6,
                 max_iterations=None, agent_order="simultaneous"):
        self.meta_solver = meta_solver
        self.reset = reset
        self.total_steps = total_steps
        self.steps_per_iter = steps_per_iter
        self.plateau_tol = plateau_tol
        self.plateau_window = plateau_window
        self.rule = rule
        self.lr = lr
        self.dt = dt
        self.k = k
        self.init = init
        self.seed = seed
        self.eval_every = eval_every
        self.metric = metric
        self.convergence_threshold = convergence_threshold
        self.nash_tol = nash_tol
        self.max_iterations = max_iterations
        self.agent_order = agent_order

    def _run(self, game):
        self._check_population()
        first = self._init(game, self.rng_)
        population = [ProductPolicy(first)]
        table = PayoffTable(game, population, population)
        meta = np.ones(1)
        meta_joint = table.col_mixture_joint(meta)
        self._record(0, meta_joint, first.copy(), force=True)
        step, last = 0, first
        self.meta_history_ = [meta]
        iteration = 0
        while step < self.total_steps:
            if self.max_iterations is not None and iteration >= self.max_iterations:
                break
            start = self._init(game, self.rng_) if self.reset else last.copy()
            learner = self._new_learner(start)
            tracker = _PlateauTracker(self.plateau_tol, self.plateau_window)
            opp_value = game.values(meta_joint).reshape((game.action_count,) * game.team_size)
            for _ in range(self.steps_per_iter):
                old = learner.policy
                self._learn(learner, opp_value)
                step += 1
                done = tracker.update(old, learner.policy) or step >= self.total_steps
                if done:
                    break
                self._record(step, meta_joint, learner.policy.copy())
            last = learner.policy.copy()
            population.append(ProductPolicy(last))
            table.extend([population[-1]], [population[-1]])
            meta = self._solve(self.meta_solver, table)[0]
            self.meta_history_.append(meta)
            meta_joint = table.col_mixture_joint(meta)
            self._record(step, meta_joint, last.copy(), force=True)
            self.record_.iteration_ends.append(step)
            iteration += 1
        self.population_ = population
        self.meta_weights_ = meta
        self.payoff_table_ = table
        self.eval_policy_ = MixturePolicy(population, meta)
        self.eval_joint_ = meta_joint
        self.policy_ = population[-1]
        self.record_.populations = {"main": [p.dists.tolist() for p in population]}
        self.record_.meta_policies = {"main": meta.tolist()}


def _q_from_tensor(value_tensor: np.ndarray, dists: np.ndarray) -> np.ndarray:
    from .learners import _contract_others
    return _contract_others(value_tensor, dists)


class OnlineDoubleOracle(_PopulationTrainer):
    """PSRO-shaped loop whose meta-policy is learned online.

    After every learner step the meta-weights over the population take a
    multiplicative-weights step with rate ``meta_lr / sqrt(t)`` on each member's
    payoff against the learner's current policy, where ``t`` is the global step.
    Weights persist when the population grows; the new member enters with a
    ``1/n`` share and the others are scaled down to make room.
    """

    algorithm = "odo"

    def __init__(self, reset=True, total_steps=1000, steps_per_iter=1000,
                 plateau_tol=PLATEAU_TOL, plateau_window=PLATEAU_WINDOW, rule="stepwise_br",
                 lr=DEFAULT_LR, dt=REPLICATOR_DT, k=MWU_K, meta_lr=1.0, init="uniform", seed=0,
                 eval_every=1, metric="auto", convergence_threshold=CONVERGENCE_THRESHOLD,
                 agent_order="simultaneous"):
        self.reset = reset
        self.total_steps = total_steps
        self.steps_per_iter = steps_per_iter
        self.plateau_tol = plateau_tol
        self.plateau_window = plateau_window
        self.rule = rule
        self.lr = lr
        self.dt = dt
        self.k = k
        self.meta_lr = meta_lr
        self.init = init
        self.seed = seed
        self.eval_every = eval_every
        self.metric = metric
        self.convergence_threshold = convergence_threshold
        self.agent_order = agent_order

    def _run(self, game):
        self._check_population()
        shape = (game.action_count,) * game.team_size
        first = self._init(game, self.rng_)
        population = [ProductPolicy(first)]
        joints = np.array([population[0].joint()])
        weights = np.ones(1)
        self._record(0, weights @ joints, first.copy(), force=True)
        step, last = 0, first
        while step < self.total_steps:
            start = self._init(game, self.rng_) if self.reset else last.copy()
            learner = self._new_learner(start)
            tracker = _PlateauTracker(self.plateau_tol, self.plateau_window)
            member_rows = game.row_values(joints)
            for _ in range(self.steps_per_iter):
                old = learner.policy
                opp = weights @ joints
                self._learn(learner, game.values(opp).reshape(shape))
                step += 1
                payoffs = member_rows @ _joint(learner.policy)
                logits = np.log(weights) + self.meta_lr / np.sqrt(step) * payoffs
                weights = np.exp(logits - logits.max())
                weights /= weights.sum()
                done = tracker.update(old, learner.policy) or step >= self.total_steps
                self._record(step, weights @ joints, learner.policy.copy(), force=done)
                if done:
                    break
            last = learner.policy.copy()
            population.append(ProductPolicy(last))
            joints = np.vstack([joints, population[-1].joint()])
            share = 1.0 / len(population)
            weights = np.append(weights * (1.0 - share), share)
            self._record(step, weights @ joints, last.copy(), force=True)
            self.record_.iteration_ends.append(step)
        self.population_ = population
        self.meta_weights_ = weights
        self.eval_policy_ = MixturePolicy(population, weights)
        self.eval_joint_ = weights @ joints
        self.policy_ = population[-1]
        self.record_.populations = {"main": [p.dists.tolist() for p in population]}
        self.record_.meta_policies = {"main": weights.tolist()}


class FictitiousCrossPlay(_PopulationTrainer):
    """Fictitious cross-play: a warm-started main policy plus a reset counter policy.

    Per iteration the main policy trains against ``eta * itself + (1 - eta) *
    sigma_{M+C}`` over the joint main+counter population, and the counter policy
    trains against ``sigma_M`` over the main population. Each stops once it
    plateaus (or after ``steps_per_iter``); both are then appended. Steps of
    both learners count toward ``total_steps``. The ``sigma_{M+C}`` mixture is
    evaluated.

    ``eta_decay`` multiplies ``eta`` after every iteration.
    """

    algorithm = "fxp"

    def __init__(self, eta=0.3, eta_decay=1.0, main_solver="nash", counter_solver="nash",
                 counter_reset=True, main_reset=False, total_steps=1000, steps_per_iter=1000,
                 plateau_tol=PLATEAU_TOL, plateau_window=PLATEAU_WINDOW, rule="stepwise_br",
                 lr=DEFAULT_LR, dt=REPLICATOR_DT, k=MWU_K, init="uniform", seed=0, eval_every=1,
                 metric="auto", convergence_threshold=CONVERGENCE_THRESHOLD, nash_tol=1e-6,
                 max_iterations=None, agent_order="simultaneous"):
        self.eta = eta
        self.eta_decay = eta_decay
        self.main_solver = main_solver
        self.counter_solver = counter_solver
        self.counter_reset = counter_reset
        self.main_reset = main_reset
        self.total_steps = total_steps
        self.steps_per_iter = steps_per_iter
        self.plateau_tol = plateau_tol
        self.plateau_window = plateau_window
        self.rule = rule
        self.lr = lr
        self.dt = dt
        self.k = k
        self.init = init
        self.seed = seed
        self.eval_every = eval_every
        self.metric = metric
        self.convergence_threshold = convergence_threshold
        self.nash_tol = nash_tol
        self.max_iterations = max_iterations
        self.agent_order = agent_order

    def _check_common(self):
        super()._check_common()
        check_interval("eta", self.eta, 0.0, 1.0)
        check_interval("eta_decay", self.eta_decay, 0.0, 1.0, low_open=True)

    def _meta(self, joint_table: PayoffTable, cross_table: PayoffTable, main_policy):
        current = ProductPolicy(main_policy)
        sigma_joint = self._solve(self.main_solver, joint_table, current)[0]
        sigma_main = self._solve(self.counter_solver, cross_table, current)[0]
        return sigma_joint, sigma_main

    def _run(self, game):
        self._check_population()
        shape = (game.action_count,) * game.team_size
        main0 = self._init(game, self.rng_)
        counter0 = self._init(game, self.rng_)
        mains = [ProductPolicy(main0)]
        counters = [ProductPolicy(counter0)]
        # the joint population interleaves main and counter policies:
        # [main_0, counter_0, main_1, counter_1, ...]
        joint_table = PayoffTable(game, [mains[0], counters[0]], [mains[0], counters[0]])
        cross_table = PayoffTable(game, mains, counters)
        sigma_joint, sigma_main = self._meta(joint_table, cross_table, main0)
        eval_joint = joint_table.col_mixture_joint(sigma_joint)
        self._record(0, eval_joint, main0.copy(), force=True)
        step, eta = 0, self.eta
        last_main, last_counter = main0, counter0
        self.eta_history_ = []
        iteration = 0
        while step < self.total_steps:
            if self.max_iterations is not None and iteration >= self.max_iterations:
                break
            self.eta_history_.append(eta)
            main = self._new_learner(self._init(game, self.rng_) if self.main_reset
                                     else last_main.copy())
            counter = self._new_learner(self._init(game, self.rng_) if self.counter_reset
                                        else last_counter.copy())
            pop_joint_value = game.values(eval_joint).reshape(shape)
            main_pop_value = game.values(cross_table.row_mixture_joint(sigma_main)).reshape(shape)
            main_done = counter_done = False
            main_track = _PlateauTracker(self.plateau_tol, self.plateau_window)
            counter_track = _PlateauTracker(self.plateau_tol, self.plateau_window)
            for _ in range(self.steps_per_iter):
                if not main_done and step < self.total_steps:
                    old = main.policy
                    self_value = game.values(_joint(old)).reshape(shape) if eta > 0 else 0.0
                    opp_value = eta * self_value + (1.0 - eta) * pop_joint_value
                    self._learn(main, opp_value)
                    step += 1
                    main_done = main_track.update(old, main.policy)
                    self._record(step, eval_joint, main.policy.copy())
                if not counter_done and step < self.total_steps:
                    old = counter.policy
                    self._learn(counter, main_pop_value)
                    step += 1
                    counter_done = counter_track.update(old, counter.policy)
                    self._record(step, eval_joint, main.policy.copy())
                if (main_done and counter_done) or step >= self.total_steps:
                    break
            last_main, last_counter = main.policy.copy(), counter.policy.copy()
            mains.append(ProductPolicy(last_main))
            counters.append(ProductPolicy(last_counter))
            # joint population keeps mains first, then counters
            joint_table.extend([mains[-1], counters[-1]], [mains[-1], counters[-1]])
            cross_table.extend([mains[-1]], [counters[-1]])
            sigma_joint, sigma_main = self._meta(joint_table, cross_table, last_main)
            eval_joint = joint_table.col_mixture_joint(sigma_joint)
            self._record(step, eval_joint, last_main.copy(), force=True)
            self.record_.iteration_ends.append(step)
            eta *= self.eta_decay
            iteration += 1
        self.main_population_ = mains
        self.counter_population_ = counters
        self.meta_weights_ = sigma_joint
        self.main_meta_weights_ = sigma_main
        self.eval_policy_ = MixturePolicy(joint_table.rows, sigma_joint)
        self.eval_joint_ = eval_joint
        self.policy_ = mains[-1]
        self.record_.populations = {"main": [p.dists.tolist() for p in mains],
                                    "counter": [p.dists.tolist() for p in counters]}
        self.record_.meta_policies = {"joint": sigma_joint.tolist(),
                                      "main": sigma_main.tolist()}


ALGORITHMS = {
    "sp": SelfPlay,
    "fsp": FictitiousSelfPlay,
    "psro": PSRO,
    "odo": OnlineDoubleOracle,
    "fxp": FictitiousCrossPlay,
}


@dataclass
class TrainConfig:
    """One training run: game, algorithm and hyperparameters.

    Fields left as ``None`` fall back to the estimator's defaults; fields the
    chosen algorithm does not accept must stay ``None``.
    """

    game: str = "motivating"
    game_params: dict = field(default_factory=dict)
    algorithm: str = "sp"
    rule: str = "stepwise_br"
    total_steps: int = 1000
    steps_per_iter: Optional[int] = None
    max_iterations: Optional[int] = None
    lr: float = DEFAULT_LR
    dt: float = REPLICATOR_DT
    k: float = MWU_K
    eta: Optional[float] = None
    eta_decay: Optional[float] = None
    meta_solver: Optional[str] = None
    main_solver: Optional[str] = None
    counter_solver: Optional[str] = None
    reset: Optional[bool] = None
    counter_reset: Optional[bool] = None
    main_reset: Optional[bool] = None
    meta_lr: Optional[float] = None
    plateau_tol: Optional[float] = None
    plateau_window: Optional[int] = None
    eval_every: int = 1
    seed: int = 0
    init: object = "uniform"
    convergence_threshold: float = CONVERGENCE_THRESHOLD
    agent_order: Optional[str] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(
                f"unknown algorithm {self.algorithm!r}; choose from {sorted(ALGORITHMS)}")
        if self.eta is not None:
            check_interval("eta", self.eta, 0.0, 1.0)
        if self.eta_decay is not None:
            check_interval("eta_decay", self.eta_decay, 0.0, 1.0, low_open=True)
        check_positive_int("total_steps", self.total_steps)
        check_positive_int("eval_every", self.eval_every)

    def estimator(self) -> _BaseTrainer:
        cls = ALGORITHMS[self.algorithm]
        accepted = set(cls._get_param_names())
        params = {}
        for name in ("rule", "total_steps", "steps_per_iter", "max_iterations", "lr", "dt", "k",
                     "eta", "eta_decay", "meta_solver", "main_solver", "counter_solver",
                     "reset", "counter_reset", "main_reset", "meta_lr", "plateau_tol",
                     "plateau_window", "eval_every", "seed", "init", "convergence_threshold",
                     "agent_order"):
            value = getattr(self, name)
            if value is None:
                continue
            if name not in accepted:
                raise ConfigurationError(f"{self.algorithm} does not take {name!r}")
            params[name] = value
        return cls(**params)

    def make_game(self) -> TeamGame:
        from .games import make_game
        return make_game(self.game, **self.game_params)


def _run(config: TrainConfig, algorithm: str) -> RunRecord:
    if config.algorithm != algorithm:
        raise ConfigurationError(f"config is for {config.algorithm!r}, not {algorithm!r}")
    return config.estimator().fit(config.make_game()).record_


def run_sp(config: TrainConfig) -> RunRecord:
    return _run(config, "sp")


def run_fsp(config: TrainConfig) -> RunRecord:
    return _run(config, "fsp")


def run_psro(config: TrainConfig) -> RunRecord:
    return _run(config, "psro")


def run_odo(config: TrainConfig) -> RunRecord:
    return _run(config, "odo")


def run_fxp(config: TrainConfig) -> RunRecord:
    return _run(config, "fxp")
