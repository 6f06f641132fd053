"""Exact per-agent Q-values and the tabular policy-update rules.

Policies are handled here as ``(team_size, action_count)`` arrays so that the
update rules stay cheap inside training loops; :class:`ProductPolicy` wraps
them at the module boundary.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from .game import MixturePolicy, ProductPolicy, TeamGame, as_mixture, joint_distribution
from .validation import ConfigurationError, check_interval

RULES = ("stepwise_br", "forel", "replicator", "mwu", "cfr", "pg")

# Constants used for the matrix-game experiments.
DEFAULT_LR = 0.1
FOREL_SCALE = 20.0
REPLICATOR_DT = 0.8
MWU_K = 10.0

# Q-value gaps below this are treated as exact ties by the stepwise best response.
TIE_ATOL = 1e-12


def _contract_others(v: np.ndarray, dists: np.ndarray) -> np.ndarray:
    """Q_i(a) for every agent from the joint value tensor ``v``."""
    n = dists.shape[0]
    letters = string.ascii_letters[:n]
    out = np.empty_like(dists)
    for i in range(n):
        operands = [v]
        subs = [letters]
        for j in range(n):
            if j != i:
                operands.append(dists[j])
                subs.append(letters[j])
        out[i] = np.einsum(",".join(subs) + "->" + letters[i], *operands)
    return out


def q_from_joint(game: TeamGame, dists: np.ndarray, opponent_joint: np.ndarray) -> np.ndarray:
    """Q-values of each agent given the opponent's joint-action distribution."""
    v = game.values(opponent_joint).reshape((game.action_count,) * game.team_size)
    return _contract_others(v, dists)


def compute_q(game: TeamGame, pi, mu) -> np.ndarray:
    """Exact ``Q_i(a) = E[U([a, x_-i], y)]`` with teammates from ``pi``, opponent ``mu``.

    Returns an array of shape ``(team_size, action_count)``.
    """
    dists = pi.dists if isinstance(pi, ProductPolicy) else np.asarray(pi, dtype=float)
    if dists.shape != (game.team_size, game.action_count):
        raise ConfigurationError("policy shape does not match the game")
    return q_from_joint(game, dists, joint_distribution(game, mu))


def greedy_actions(q: np.ndarray, atol: float = TIE_ATOL) -> np.ndarray:
    """Per-agent argmax with near-ties resolved to the lowest action index."""
    best = q.max(axis=1, keepdims=True)
    return np.argmax(q >= best - atol, axis=1)


def step_stepwise_br(pi: np.ndarray, q: np.ndarray, lr: float = DEFAULT_LR) -> np.ndarray:
    """Move each agent a fraction ``lr`` toward its greedy action."""
    check_interval("lr", lr, 0.0, 1.0, low_open=True)
    target = np.zeros_like(pi)
    target[np.arange(pi.shape[0]), greedy_actions(q)] = 1.0
    return (1.0 - lr) * pi + lr * target


def forel_rate(t: int) -> float:
    return FOREL_SCALE / np.sqrt(t)


def step_forel(cum: np.ndarray, q: np.ndarray, t: int):
    """Follow-the-regularised-leader: accumulate ``lr_t * Q`` and take a softmax.

    Returns ``(new_cumulative, policy)``.
    """
    if t < 1:
        raise ConfigurationError("FoReL step counter starts at 1")
    cum = cum + forel_rate(t) * q
    return cum, softmax(cum, axis=1)


def step_replicator(pi: np.ndarray, q: np.ndarray, dt: float = REPLICATOR_DT) -> np.ndarray:
    """Discrete replicator dynamics on the advantage ``Q - <pi, Q>``."""
    if dt <= 0:
        raise ConfigurationError("replicator step size must be positive")
    baseline = (pi * q).sum(axis=1, keepdims=True)
    new = np.clip(pi + dt * pi * (q - baseline), 0.0, None)
    total = new.sum(axis=1, keepdims=True)
    # an all-zero row cannot happen for dt*|advantage| < 1 but keep pi if it does
    return np.where(total > 0, new / np.where(total > 0, total, 1.0), pi)


def step_mwu(pi: np.ndarray, q: np.ndarray, k: float = MWU_K) -> np.ndarray:
    """Multiplicative weights: ``pi' ∝ pi * softmax(k Q)``."""
    if k <= 0:
        raise ConfigurationError("MWU rate must be positive")
    new = pi * softmax(k * q, axis=1)
    total = new.sum(axis=1, keepdims=True)
    return np.where(total > 0, new / np.where(total > 0, total, 1.0), pi)


def regret_matching(regret: np.ndarray) -> np.ndarray:
    pos = np.maximum(regret, 0.0)
    total = pos.sum(axis=1, keepdims=True)
    uniform = np.full_like(regret, 1.0 / regret.shape[1])
    return np.where(total > 0, pos / np.where(total > 0, total, 1.0), uniform)


def step_cfr(regret: np.ndarray, q: np.ndarray, value: float):
    """Accumulate ``Q - V`` and play regret matching. Returns ``(regret, policy)``."""
    regret = regret + (q - value)
    return regret, regret_matching(regret)


def step_policy_gradient(logits: np.ndarray, pi: np.ndarray, q: np.ndarray, lr: float):
    """Exact softmax policy-gradient ascent on each agent's logits."""
    baseline = (pi * q).sum(axis=1, keepdims=True)
    logits = logits + lr * pi * (q - baseline)
    return logits, softmax(logits, axis=1)


@dataclass
class LearnerState:
    """Mutable state of one tabular learner.

    ``cumulative`` holds the FoReL running sum or the CFR regret table,
    depending on ``rule``.
    """

    rule: str
    policy: np.ndarray
    lr: float = DEFAULT_LR
    dt: float = REPLICATOR_DT
    k: float = MWU_K
    t: int = 0
    cumulative: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ConfigurationError(f"unknown update rule {self.rule!r}; choose from {RULES}")
        self.policy = np.array(self.policy, dtype=float)
        if self.cumulative is None:
            self.cumulative = np.zeros_like(self.policy)
            if self.rule in ("forel", "pg"):
                # start the leader at the initial policy; softmax(log pi) == pi
                with np.errstate(divide="ignore"):
                    logits = np.log(self.policy)
                self.cumulative = logits - logits.max(axis=1, keepdims=True)

    def _update(self, q: np.ndarray, value, t: int):
        """New ``(cumulative, policy)`` after one update at step ``t``; no mutation."""
        if self.rule == "stepwise_br":
            return self.cumulative, step_stepwise_br(self.policy, q, self.lr)
        if self.rule == "forel":
            return step_forel(self.cumulative, q, t)
        if self.rule == "replicator":
            return self.cumulative, step_replicator(self.policy, q, self.dt)
        if self.rule == "mwu":
            return self.cumulative, step_mwu(self.policy, q, self.k)
        if self.rule == "pg":
            return step_policy_gradient(self.cumulative, self.policy, q, self.lr)
        if value is None:
            value = float((self.policy[0] * q[0]).sum())
        return step_cfr(self.cumulative, q, value)

    def step(self, q: np.ndarray, value: float = None) -> np.ndarray:
        """Update every agent at once from ``q``."""
        self.t += 1
        self.cumulative, self.policy = self._update(q, value, self.t)
        return self.policy

    def sweep(self, q_of) -> np.ndarray:
        """Update agents one at a time, each seeing its teammates' new policies.

        ``q_of(policy)`` returns ``(q, value)`` for the current policy. One
        sweep counts as a single step.
        """
        self.t += 1
        for i in range(self.policy.shape[0]):
            q, value = q_of(self.policy)
            cumulative, policy = self._update(q, value, self.t)
            self.cumulative = self.cumulative.copy()
            self.cumulative[i] = cumulative[i]
            self.policy = self.policy.copy()
            self.policy[i] = policy[i]
        return self.policy

    def product_policy(self) -> ProductPolicy:
        return ProductPolicy(self.policy)


def init_policy(team_size: int, action_count: int, mode="uniform", rng=None) -> np.ndarray:
    """Initial per-agent distributions.

    ``mode`` is ``"uniform"``, ``"random"`` (i.i.d. uniform entries, normalised)
    or an explicit array / list of per-agent distributions.
    """
    if isinstance(mode, str):
        if mode == "uniform":
            return np.full((team_size, action_count), 1.0 / action_count)
        if mode == "random":
            if rng is None:
                raise ConfigurationError("random initialisation needs an rng")
            raw = rng.uniform(0.0, 1.0, size=(team_size, action_count))
            return raw / raw.sum(axis=1, keepdims=True)
        raise ConfigurationError(f"unknown init mode {mode!r}")
    dists = np.array(mode, dtype=float)
    if dists.shape != (team_size, action_count):
        raise ConfigurationError("explicit initial policy has the wrong shape")
    return ProductPolicy(dists).dists


def fsp_opponent(history, pi, eta: float) -> MixturePolicy:
    """``eta * pi + (1 - eta) * mean(history)`` as a mixture."""
    check_interval("eta", eta, 0.0, 1.0)
    history = list(as_mixture(history).members) if isinstance(history, MixturePolicy) else list(history)
    if not history:
        raise ConfigurationError("FSP needs at least one stored policy")
    t = len(history)
    members = [pi] + history
    weights = np.array([eta] + [(1.0 - eta) / t] * t)
    return MixturePolicy(members, weights)


def check_preference_preservation(trajectory, rtol: float = 1e-12):
    """Find steps where a learner reduced the odds of a consistently preferred action.

    ``trajectory`` is a sequence of ``(policy, q)`` pairs, where ``q`` was observed
    at that policy. For every agent ``i``, ordered action pair ``(x, y)`` and step
    ``t`` such that ``Q_i(x) >= Q_i(y)`` at every step up to ``t``, the odds
    ``pi_i(x) / pi_i(y)`` must not decrease from ``t`` to ``t + 1``. Odds are
    compared by cross-multiplication; ``rtol`` absorbs rounding.

    Returns a list of ``(agent, (x, y), t)`` violations.
    """
    if not trajectory:
        raise ConfigurationError("empty trajectory")
    pis = np.array([np.asarray(p.dists if isinstance(p, ProductPolicy) else p, float)
                    for p, _ in trajectory])
    qs = np.array([np.asarray(q, float) for _, q in trajectory])
    if pis.shape != qs.shape:
        raise ConfigurationError("policy and Q dimensions disagree")
    steps, n, k = pis.shape
    violations = []
    for x in range(k):
        for y in range(k):
            if x == y:
                continue
            prefers = np.logical_and.accumulate(qs[:, :, x] >= qs[:, :, y], axis=0)
            now, nxt = pis[:-1], pis[1:]
            lhs = nxt[:, :, x] * now[:, :, y]
            rhs = now[:, :, x] * nxt[:, :, y]
            bad = prefers[:-1] & (lhs < rhs * (1.0 - rtol))
            for t, i in zip(*np.nonzero(bad)):
                violations.append((int(i), (x, y), int(t)))
    violations.sort(key=lambda v: (v[2], v[0], v[1]))
    return violations


def theorem1_threshold(p) -> float:
    """Largest teammate probability of all-0 that keeps SP away from the optimum."""
    return 1.0 / (p.N + 1 + 2 * p.C + p.eps)
