"""Experiment runner, Elo tournaments, theorem checks and file export."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .game import MixturePolicy, ProductPolicy, TeamGame, team_exploitability, win_probability
from .games import MotivatingParams, load_matrix_game, make_game, make_motivating
from .learners import check_preference_preservation, theorem1_threshold
from .trainers import (ALGORITHMS, CONVERGENCE_THRESHOLD, FixedOpponent, RunRecord, SelfPlay,
                       TrainConfig)
from .validation import ConfigurationError, check_positive_int

logger = logging.getLogger(__name__)

ELO_ANCHOR = 1500.0
ELO_SCALE = 400.0

# rules whose policy-odds updates never go against a consistently preferred action
PREFERENCE_PRESERVING = ("stepwise_br", "forel", "replicator", "mwu", "pg")


def elo_expected(delta):
    """Expected score of a player rated ``delta`` points above the opponent."""
    return 1.0 / (1.0 + 10.0 ** (-np.asarray(delta, dtype=float) / ELO_SCALE))


@dataclass
class EloTable:
    names: list
    ratings: np.ndarray
    scores: np.ndarray

    @property
    def expected(self) -> np.ndarray:
        """Model expected score of every row player against every column player."""
        return elo_expected(self.ratings[:, None] - self.ratings[None, :])

    def to_dict(self) -> dict:
        return {"names": list(self.names), "ratings": self.ratings.tolist(),
                "scores": self.scores.tolist(), "expected": self.expected.tolist()}


def fit_bradley_terry(scores, ridge: float = 1e-9) -> np.ndarray:
    """Maximum-likelihood Elo ratings from a matrix of pairwise scores.

    ``scores[i, j]`` is player ``i``'s score against ``j`` (win 1, draw 0.5).
    A tiny ridge keeps ratings finite when one player dominates another;
    ratings are shifted to average 1500.
    """
    s = np.asarray(scores, dtype=float)
    n = s.shape[0]
    if s.ndim != 2 or s.shape != (n, n) or n < 2:
        raise ConfigurationError("scores must be a square matrix over at least two players")
    off = ~np.eye(n, dtype=bool)
    if np.any((s[off] < 0) | (s[off] > 1)):
        raise ConfigurationError("scores must lie in [0, 1]")
    w = np.where(off, s, 0.0)
    # natural-log strengths; Elo = strength * 400 / ln(10)
    def objective(theta):
        d = theta[:, None] - theta[None, :]
        log_p = -np.logaddexp(0.0, -d)
        p = np.exp(log_p)
        nll = -(w * log_p).sum() + ridge * theta @ theta
        grad = -((w * (1.0 - p)).sum(axis=1) - (w * (1.0 - p)).sum(axis=0)) + 2 * ridge * theta
        return nll, grad

    res = minimize(objective, np.zeros(n), jac=True, method="BFGS",
                   options={"gtol": 1e-12, "maxiter": 10000})
    theta = res.x - res.x.mean()
    return ELO_ANCHOR + theta * ELO_SCALE / np.log(10.0)


def pairwise_scores(game: TeamGame, policies) -> np.ndarray:
    """Exact score ``p_win + p_draw / 2`` of every policy against every other."""
    n = len(policies)
    s = np.full((n, n), 0.5)
    for i in range(n):
        for j in range(i + 1, n):
            win, draw, _ = win_probability(game, policies[i], policies[j])
            s[i, j] = win + 0.5 * draw
            s[j, i] = 1.0 - s[i, j]
    return s


def tournament(game: TeamGame, policies, names=None) -> EloTable:
    """Round-robin of exact pairwise scores, rated by Bradley-Terry."""
    if len(policies) < 2:
        raise ConfigurationError("a tournament needs at least two policies")
    names = list(names) if names is not None else [f"p{i}" for i in range(len(policies))]
    scores = pairwise_scores(game, policies)
    return EloTable(names, fit_bradley_terry(scores), scores)


def load_policy(source) -> MixturePolicy:
    """Read ``{"members": [[per-agent dists], ...], "weights": [...]}``."""
    if isinstance(source, (str, Path)) and Path(source).exists():
        doc = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        doc = json.loads(source)
    else:
        doc = dict(source)
    unknown = set(doc) - {"members", "weights"}
    if unknown:
        raise ConfigurationError(f"unknown fields in policy file: {sorted(unknown)}")
    if "members" not in doc:
        raise ConfigurationError("policy file needs 'members'")
    members = [ProductPolicy(m) for m in doc["members"]]
    return MixturePolicy(members, doc.get("weights"))


def policy_to_dict(policy) -> dict:
    policy = policy.to_mixture() if isinstance(policy, ProductPolicy) else policy
    return {"members": [m.dists.tolist() for m in policy.members],
            "weights": policy.weights.tolist()}


def resolve_game(source, params=None) -> TeamGame:
    """A named game (with keyword params) or a path to a JSON matrix game."""
    if isinstance(source, TeamGame):
        return source
    if isinstance(source, (str, Path)) and Path(source).is_file():
        if params:
            raise ConfigurationError("matrix games loaded from file take no parameters")
        return load_matrix_game(source)
    return make_game(str(source), **(params or {}))


# --- theorem checks -------------------------------------------------------

def _sample_below_threshold(p: MotivatingParams, rng, max_tries=100000) -> np.ndarray:
    threshold = theorem1_threshold(p)
    for _ in range(max_tries):
        raw = rng.uniform(0.0, 1.0, size=(p.N, 2))
        dists = raw / raw.sum(axis=1, keepdims=True)
        zero = dists[:, 0]
        others = np.array([np.prod(np.delete(zero, i)) for i in range(p.N)])
        if np.all(others <= threshold):
            return dists
    raise ConfigurationError("could not sample an initialisation below the threshold")


def theorem_check(which: int, params: MotivatingParams = None, trials: int = 100, seed: int = 0,
                  rules=PREFERENCE_PRESERVING, steps: int = 2000, grid=None,
                  threshold: float = CONVERGENCE_THRESHOLD) -> dict:
    """Empirical checks of the two self-play results on the motivating game.

    ``which=1``: draw ``trials`` random initialisations whose teammate all-0
    probability is below the threshold for every agent, train each rule by
    self-play and count runs reaching the global equilibrium and
    preference-preservation violations.

    ``which=2``: for symmetric initialisations ``p`` on ``grid``, compare the
    set of good starting points of self-play with that of learning against the
    fixed all-1 opponent, using the first rule in ``rules``.
    """
    params = params or MotivatingParams()
    game = make_motivating(params)
    check_positive_int("steps", steps)
    if which == 1:
        return _theorem1(game, params, trials, seed, rules, steps, threshold)
    if which == 2:
        return _theorem2(game, params, rules[0], steps, grid, threshold)
    raise ConfigurationError("which must be 1 or 2")


def _theorem1(game, params, trials, seed, rules, steps, threshold) -> dict:
    check_positive_int("trials", trials)
    rng = np.random.default_rng(seed)
    inits = [_sample_below_threshold(params, rng) for _ in range(trials)]
    per_rule = {}
    for rule in rules:
        converged, violations = 0, 0
        for init in inits:
            est = SelfPlay(rule=rule, total_steps=steps, init=init, evaluate_average=False,
                           keep_trajectory=True, convergence_threshold=threshold).fit(game)
            converged += est.record_.convergence_step is not None
            violations += len(check_preference_preservation(est.trajectory_))
        per_rule[rule] = {"converged": converged, "violations": violations}
    return {"theorem": 1, "params": vars(params), "threshold": theorem1_threshold(params),
            "trials": trials, "steps": steps, "seed": seed, "rules": per_rule,
            "holds": all(r["converged"] == 0 and r["violations"] == 0 for r in per_rule.values())}


def _good(est) -> bool:
    return est.record_.convergence_step is not None


def symmetric_init(n: int, p: float) -> np.ndarray:
    return np.tile([p, 1.0 - p], (n, 1))


def _theorem2(game, params, rule, steps, grid, threshold) -> dict:
    grid = np.round(np.arange(1, 100) / 100, 2) if grid is None else np.asarray(grid, float)
    all_one = ProductPolicy.deterministic([1] * params.N, 2)
    witness = (params.N + params.C) ** (-1.0 / (params.N - 1))

    def good_pair(p):
        init = symmetric_init(params.N, p)
        sp = SelfPlay(rule=rule, total_steps=steps, init=init, evaluate_average=False,
                      convergence_threshold=threshold, eval_every=steps).fit(game)
        fixed = FixedOpponent(opponent=all_one, rule=rule, total_steps=steps, init=init,
                              convergence_threshold=threshold, eval_every=steps).fit(game)
        return _good(sp), _good(fixed)

    s_sp, s_mu = [], []
    for p in grid:
        g_sp, g_mu = good_pair(float(p))
        if g_sp:
            s_sp.append(float(p))
        if g_mu:
            s_mu.append(float(p))
    w_sp, w_mu = good_pair(witness)
    subset = set(s_sp) <= set(s_mu)
    difference = sorted(set(s_mu) - set(s_sp))
    return {"theorem": 2, "params": vars(params), "rule": rule, "steps": steps,
            "grid": [float(p) for p in grid], "S_sp": s_sp, "S_mu": s_mu,
            "difference": difference, "subset": subset,
            "witness": {"p": witness, "good_sp": w_sp, "good_mu": w_mu},
            "holds": subset and bool(difference) and w_mu and not w_sp}


# --- experiment runner ----------------------------------------------------

_CONFIG_FIELDS = {"game", "algorithm", "seeds", "total_steps", "eval_every", "output_dir",
                  "convergence_threshold"}
_GAME_FIELDS = {"id", "params"}
_ALGORITHM_FIELDS = {"id", "name", "rule", "hyperparams"}


@dataclass
class ExperimentConfig:
    """A JSON experiment: one game, one or more algorithms, a list of seeds."""

    game: dict
    algorithms: list
    seeds: list
    total_steps: int = 1000
    eval_every: int = 1
    output_dir: str = "results"
    convergence_threshold: float = CONVERGENCE_THRESHOLD
    names: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        unknown = set(doc) - _CONFIG_FIELDS
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        for required in ("game", "algorithm", "seeds"):
            if required not in doc:
                raise ConfigurationError(f"config is missing {required!r}")
        game = dict(doc["game"])
        if set(game) - _GAME_FIELDS or "id" not in game:
            raise ConfigurationError("game must be {'id': ..., 'params': {...}}")
        algorithms = doc["algorithm"]
        algorithms = [algorithms] if isinstance(algorithms, dict) else list(algorithms)
        if not algorithms:
            raise ConfigurationError("at least one algorithm is required")
        names = []
        for a in algorithms:
            if set(a) - _ALGORITHM_FIELDS or "id" not in a:
                raise ConfigurationError(
                    f"algorithm entries take {sorted(_ALGORITHM_FIELDS)}, got {sorted(a)}")
            if a["id"] not in ALGORITHMS:
                raise ConfigurationError(f"unknown algorithm {a['id']!r}")
            names.append(a.get("name", a["id"]))
        if len(set(names)) != len(names):
            raise ConfigurationError("algorithm names must be unique")
        seeds = doc["seeds"]
        if not isinstance(seeds, list) or not seeds:
            raise ConfigurationError("seeds must be a non-empty list")
        if not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
            raise ConfigurationError("seeds must be integers")
        cfg = cls(game=game, algorithms=algorithms, seeds=seeds,
                  total_steps=doc.get("total_steps", 1000),
                  eval_every=doc.get("eval_every", 1),
                  output_dir=doc.get("output_dir", "results"),
                  convergence_threshold=doc.get("convergence_threshold", CONVERGENCE_THRESHOLD),
                  names=names)
        check_positive_int("total_steps", cfg.total_steps)
        check_positive_int("eval_every", cfg.eval_every)
        for name, seed in cfg.runs():
            cfg.train_config(name, seed).estimator()
        return cfg

    @classmethod
    def load(cls, source) -> "ExperimentConfig":
        if isinstance(source, dict):
            return cls.from_dict(source)
        try:
            return cls.from_dict(json.loads(Path(source).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from None

    def runs(self):
        for name in self.names:
            for seed in self.seeds:
                yield name, seed

    def train_config(self, name: str, seed: int) -> TrainConfig:
        entry = self.algorithms[self.names.index(name)]
        hyper = dict(entry.get("hyperparams", {}))
        clash = set(hyper) & {"total_steps", "eval_every", "seed", "convergence_threshold",
                              "rule", "game", "game_params", "algorithm"}
        if clash:
            raise ConfigurationError(f"hyperparams may not set {sorted(clash)}")
        try:
            return TrainConfig(game=self.game["id"], game_params=dict(self.game.get("params", {})),
                               algorithm=entry["id"], rule=entry.get("rule", "stepwise_br"),
                               total_steps=self.total_steps, eval_every=self.eval_every,
                               seed=seed, convergence_threshold=self.convergence_threshold,
                               **hyper)
        except TypeError as exc:
            raise ConfigurationError(f"bad hyperparameters for {name!r}: {exc}") from None


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_record_csv(record: RunRecord, path, action_count: int = None) -> None:
    """Write ``step, exploitability`` (plus per-agent ``P(action 1)`` for 2-action games)."""
    snap = next((s for s in record.snapshots if s is not None), None)
    per_agent = action_count == 2 and snap is not None
    header = ["step", "exploitability"]
    if per_agent:
        header += [f"agent{i}_p1" for i in range(np.asarray(snap).shape[0])]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for step, value, s in zip(record.steps, record.exploitability, record.snapshots):
            row = [str(step), _fmt(value)]
            if per_agent:
                row += [_fmt(p) for p in np.asarray(s)[:, 1]]
            writer.writerow(row)


def run_summary(name: str, seed: int, est) -> dict:
    rec = est.record_
    pops = {k: len(v) for k, v in rec.populations.items()}
    return {"algorithm": name, "id": est.algorithm, "seed": seed,
            "convergence_step": rec.convergence_step,
            "final_exploitability": rec.final_exploitability,
            "total_steps": rec.total_steps, "population_sizes": pops}


def run_experiment(config, output_dir=None) -> dict:
    """Run every (algorithm, seed) pair, writing one CSV per run and ``summary.json``.

    Completed runs are written as soon as they finish, so a failure part-way
    leaves the earlier results on disk.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.load(config)
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    game = None
    summaries = []
    try:
        for name, seed in cfg.runs():
            tc = cfg.train_config(name, seed)
            game = game or tc.make_game()
            est = tc.estimator().fit(game)
            write_record_csv(est.record_, out / f"{name}_seed{seed}.csv", game.action_count)
            summaries.append(run_summary(name, seed, est))
            logger.info("%s seed %d: final exploitability %.4g", name, seed,
                        est.record_.final_exploitability)
    finally:
        doc = {"game": cfg.game, "runs": summaries}
        (out / "summary.json").write_text(json.dumps(doc, indent=2) + "\n")
    return doc


def exploitability_report(game: TeamGame, policy) -> dict:
    report = {"team_exploitability": team_exploitability(game, policy)}
    from .games import SadParams, sad_exploitability
    if isinstance(game.params, SadParams):
        report["sad_exploitability"] = sad_exploitability(game.params, policy, game)
    return report
