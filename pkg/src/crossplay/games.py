"""Constructors for the team games studied here.

* team Rock-Paper-Scissors (2 agents, 2 actions each),
* the motivating game with a hidden global optimum behind a local NE,
* seek-attack-defend (SAD), whose global NE needs a role split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .game import MixturePolicy, ProductPolicy, TeamGame, expected_utility
from .validation import ConfigurationError

ROCK, PAPER, SCISSORS = 0, 1, 2


def rps_team_move(actions) -> int:
    """Team move for a pair of agent actions.

    Both 0 plays Rock and both 1 plays Scissors; a split team plays Paper.
    """
    a, b = actions
    if a == b == 0:
        return ROCK
    if a == b == 1:
        return SCISSORS
    return PAPER


def _rps(u: int, v: int) -> float:
    # moves are ordered so that each one beats its predecessor mod 3
    return float({0: 0, 1: 1, 2: -1}[(u - v) % 3])


def make_team_rps() -> TeamGame:
    def utility(x, y):
        return _rps(rps_team_move(x), rps_team_move(y))

    return TeamGame(team_size=2, action_count=2, utility=utility, name="team_rps")


def team_move_distribution(policy) -> np.ndarray:
    """(P(Rock), P(Paper), P(Scissors)) induced by a team-RPS policy."""
    if isinstance(policy, ProductPolicy):
        policy = policy.to_mixture()
    out = np.zeros(3)
    for w, member in zip(policy.weights, policy.members):
        p0, p1 = member.dists[:, 0]
        rock = p0 * p1
        scissors = (1 - p0) * (1 - p1)
        out += w * np.array([rock, 1.0 - rock - scissors, scissors])
    return out


@dataclass(frozen=True)
class MotivatingParams:
    N: int = 3
    C: float = 1.5
    eps: float = 0.1

    def __post_init__(self):
        if self.N < 2:
            raise ConfigurationError("motivating game needs N >= 2")
        if not 0 < self.eps < self.C < self.N:
            raise ConfigurationError("motivating game requires 0 < eps < C < N")


def make_motivating(p: MotivatingParams = MotivatingParams()) -> TeamGame:
    n, c, eps = p.N, p.C, p.eps
    zeros, ones = (0,) * n, (1,) * n

    def utility(x, y):
        x, y = tuple(x), tuple(y)
        if x == zeros:
            return c if y == ones else eps * sum(y)
        if y == zeros:
            return -(c if x == ones else eps * sum(x))
        return float(sum(x) - sum(y))

    return TeamGame(team_size=n, action_count=2, utility=utility, name="motivating",
                    params=p)


def motivating_delta_q(p: MotivatingParams, teammates, opponent: ProductPolicy) -> float:
    """Closed-form ``Q_i(0) - Q_i(1)`` for one agent of the motivating game.

    Args:
        p: game parameters.
        teammates: ``(N-1, 2)`` array with the other agents' distributions.
        opponent: the opposing team's product policy.
    """
    teammates = np.asarray(teammates, dtype=float).reshape(-1, 2)
    mu = opponent.dists
    if teammates.shape[0] != p.N - 1 or mu.shape != (p.N, 2):
        raise ConfigurationError("inconsistent team size for the motivating game")
    pi0, pi1 = np.prod(teammates[:, 0]), np.prod(teammates[:, 1])
    mu0, mu1 = np.prod(mu[:, 0]), np.prod(mu[:, 1])
    mu_norm = mu[:, 1].sum()
    return float(mu0 * (1 + p.eps) + pi0 * mu_norm * (1 + p.eps)
                 + (pi0 * mu1 + pi1 * mu0) * (p.C - p.N * p.eps) - 1)


@dataclass(frozen=True)
class SadParams:
    """Seek-attack-defend parameters.

    Actions ``0..A`` seek, ``A+1`` attacks and ``A+2`` defends.
    """

    N: int = 4
    A: int = 4
    rewards: tuple = field(default=None)

    def __post_init__(self):
        if self.N < 1 or self.A < 0:
            raise ConfigurationError("SAD needs N >= 1 and A >= 0")
        rewards = self.rewards
        if rewards is None:
            rewards = tuple(float(x) for x in range(self.A + 1))
        rewards = tuple(float(r) for r in rewards)
        if len(rewards) != self.A + 1:
            raise ConfigurationError("SAD needs one reward per seeking action")
        if rewards[0] != 0 or any(b <= a for a, b in zip(rewards, rewards[1:])):
            raise ConfigurationError("SAD rewards must start at 0 and strictly increase")
        object.__setattr__(self, "rewards", rewards)

    @property
    def attack(self) -> int:
        return self.A + 1

    @property
    def defend(self) -> int:
        return self.A + 2

    @property
    def action_count(self) -> int:
        return self.A + 3


def _sad_team_terms(p: SadParams, joints: np.ndarray):
    """Seeking reward, defended flag and attacking flag for each joint action."""
    seeking = joints <= p.A
    big, small = p.A + 10, -10
    hi = np.where(seeking, joints, small).max(axis=1)
    lo = np.where(seeking, joints, big).min(axis=1)
    any_seek = seeking.any(axis=1)
    level = np.where(hi - lo > 1, 0, lo)
    level = np.where(any_seek, level, 0)
    r = np.asarray(p.rewards)
    counted = seeking & (joints >= level[:, None]) & (joints <= level[:, None] + 1)
    seek_reward = np.where(counted, r[np.minimum(joints, p.A)], 0.0).sum(axis=1)
    defended = (joints == p.defend).any(axis=1)
    attacking = (joints == p.attack).sum(axis=1) >= 2
    return seek_reward, defended, attacking


def sad_team_reward(p: SadParams, own, other) -> float:
    """Final reward of a team playing ``own`` against ``other``."""
    joints = np.array([own, other])
    seek, defended, attacking = _sad_team_terms(p, joints)
    if not defended[0] and attacking[1]:
        return 0.0
    return float(seek[0])


def make_sad(p: SadParams = SadParams()) -> TeamGame:
    k = p.action_count
    joints = np.array(np.unravel_index(np.arange(k ** p.N), (k,) * p.N)).T
    seek, defended, attacking = _sad_team_terms(p, joints)
    # the row team's reward is seek[x] unless an undefended x faces an attack:
    # R = seek 1^T - (seek * undefended) attacking^T, and M = R - R^T has rank <= 4
    exposed = seek * ~defended
    attacking = attacking.astype(float)
    ones = np.ones_like(seek)
    u = np.column_stack([seek, -exposed, -ones, attacking])
    v = np.column_stack([ones, attacking, seek, exposed])

    def utility(x, y):
        return sad_team_reward(p, x, y) - sad_team_reward(p, y, x)

    return TeamGame(team_size=p.N, action_count=k, utility=utility, name="sad",
                    params=p, factors_=(u, v))


def sad_reference_policies(p: SadParams = SadParams()):
    """The three supports of the SAD equilibrium and the equilibrium mixture.

    Returns ``(seek, attack, defend, sigma_star)``.
    """
    if p.N < 3:
        raise ConfigurationError("SAD reference policies need N >= 3")
    k = p.action_count
    seek = ProductPolicy.deterministic([p.A] * p.N, k)
    attack = ProductPolicy.deterministic([p.attack, p.attack] + [p.A] * (p.N - 2), k)
    defend = ProductPolicy.deterministic([p.defend] + [p.A] * (p.N - 1), k)
    sigma_star = MixturePolicy([seek, attack, defend], [0.25, 0.25, 0.5])
    return seek, attack, defend, sigma_star


def sad_exploitability(p: SadParams, pi, game: TeamGame = None) -> float:
    """Total non-negative gain of the three reference policies against ``pi``."""
    game = game or make_sad(p)
    refs = sad_reference_policies(p)[:3]
    return float(sum(max(0.0, expected_utility(game, mu, pi)) for mu in refs))


def load_matrix_game(source) -> TeamGame:
    """Build a game from a JSON description.

    ``{"team_size": int, "action_count": int, "utility": [[...], ...]}`` where
    the utility table is indexed by flattened joint actions. The table is not
    required to be antisymmetric, so the game is flagged symmetric only when it is.
    """
    if isinstance(source, (str, Path)) and Path(source).exists():
        doc = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        doc = json.loads(source)
    else:
        doc = dict(source)
    unknown = set(doc) - {"team_size", "action_count", "utility", "name"}
    if unknown:
        raise ConfigurationError(f"unknown fields in matrix game: {sorted(unknown)}")
    try:
        n, k, table = int(doc["team_size"]), int(doc["action_count"]), doc["utility"]
    except KeyError as exc:
        raise ConfigurationError(f"matrix game is missing field {exc}") from None
    m = np.asarray(table, dtype=float)
    symmetric = m.shape[0] == m.shape[1] and np.allclose(m, -m.T, atol=0)
    return TeamGame(team_size=n, action_count=k, symmetric=bool(symmetric),
                    name=doc.get("name", "matrix"), matrix_=m)


GAMES = {
    "team_rps": lambda **kw: make_team_rps(),
    "motivating": lambda **kw: make_motivating(MotivatingParams(**kw)),
    "sad": lambda **kw: make_sad(SadParams(**_sad_kwargs(kw))),
}


def _sad_kwargs(kw):
    kw = dict(kw)
    if "rewards" in kw and kw["rewards"] is not None:
        kw["rewards"] = tuple(kw["rewards"])
    return kw


def make_game(game_id: str, **params) -> TeamGame:
    """Construct a named game with keyword parameters."""
    try:
        return GAMES[game_id](**params)
    except KeyError:
        raise ConfigurationError(f"unknown game {game_id!r}; choose from {sorted(GAMES)}") from None
