"""Two-team zero-sum normal-form games evaluated exactly by enumeration.

Joint actions of a team are indexed lexicographically with agent 0 as the
most significant digit, so index order and lexicographic order agree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .validation import ConfigurationError, check_distribution, check_weights


@dataclass(eq=False)
class TeamGame:
    """A symmetric two-team zero-sum game.

    ``utility(x, y)`` is team 1's payoff when team 1 plays joint action ``x``
    and team 2 plays ``y``. Games that can build their payoff table in
    vectorised form pass it as ``matrix_`` and ``utility`` becomes a lookup.
    Large games with a low-rank table may instead pass ``factors_ = (U, V)``
    with ``M = U @ V.T``; matrix-vector products then avoid the dense table.
    """

    team_size: int
    action_count: int
    utility: Optional[Callable[[tuple, tuple], float]] = None
    symmetric: bool = True
    name: str = "game"
    params: object = None
    matrix_: Optional[np.ndarray] = field(default=None, repr=False)
    factors_: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.team_size < 1 or self.action_count < 1:
            raise ConfigurationError("team_size and action_count must be positive")
        if self.utility is None and self.matrix_ is None and self.factors_ is None:
            raise ConfigurationError("either a utility oracle or a payoff matrix is required")
        if self.factors_ is not None:
            u, v = (np.asarray(f, dtype=float) for f in self.factors_)
            if u.ndim != 2 or u.shape != v.shape or u.shape[0] != self.n_joint:
                raise ConfigurationError("payoff factors must both be (n_joint, rank) arrays")
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
                raise ConfigurationError("payoff factors contain non-finite entries")
            self.factors_ = (u, v)
        if self.matrix_ is not None:
            m = np.asarray(self.matrix_, dtype=float)
            if m.shape != (self.n_joint, self.n_joint):
                raise ConfigurationError(
                    f"payoff matrix must be {self.n_joint}x{self.n_joint}, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ConfigurationError("payoff matrix contains non-finite entries")
            self.matrix_ = m

    @property
    def n_joint(self) -> int:
        return self.action_count ** self.team_size

    def joint_actions(self):
        """All joint actions in index order."""
        return itertools.product(range(self.action_count), repeat=self.team_size)

    def joint_index(self, actions: Sequence[int]) -> int:
        actions = tuple(actions)
        if len(actions) != self.team_size or not all(0 <= a < self.action_count for a in actions):
            raise ConfigurationError(f"invalid joint action {actions!r}")
        idx = 0
        for a in actions:
            idx = idx * self.action_count + a
        return idx

    def joint_action(self, index: int) -> tuple:
        out = []
        for _ in range(self.team_size):
            index, a = divmod(index, self.action_count)
            out.append(a)
        return tuple(reversed(out))

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense payoff table ``M[x, y] = U(x, y)`` over joint-action indices."""
        if self.matrix_ is not None:
            return self.matrix_
        if self.factors_ is not None:
            u, v = self.factors_
            return u @ v.T
        joints = list(self.joint_actions())
        m = np.array([[self.utility(x, y) for y in joints] for x in joints], dtype=float)
        if not np.all(np.isfinite(m)):
            raise ConfigurationError("utility oracle returned non-finite values")
        return m

    def values(self, q: np.ndarray) -> np.ndarray:
        """``M @ q``: row payoff of every joint action against column distribution(s) ``q``."""
        if self.factors_ is not None:
            u, v = self.factors_
            return u @ (v.T @ q)
        return self.matrix @ q

    def row_values(self, p: np.ndarray) -> np.ndarray:
        """``p @ M``: row payoff of distribution(s) ``p`` against every column joint action."""
        if self.factors_ is not None:
            u, v = self.factors_
            return (p @ u) @ v.T
        return p @ self.matrix

    @cached_property
    def outcome_masks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        m = self.matrix
        return (m > 0).astype(float), (m == 0).astype(float), (m < 0).astype(float)

    def payoff(self, x: Sequence[int], y: Sequence[int]) -> float:
        return float(self.matrix[self.joint_index(x), self.joint_index(y)])


class ProductPolicy:
    """One team's factored policy: an independent distribution per agent."""

    def __init__(self, dists):
        dists = np.array(dists, dtype=float)
        if dists.ndim != 2:
            raise ConfigurationError("dists must be a (team_size, action_count) array")
        for d in dists:
            check_distribution(d)
        self.dists = dists

    @classmethod
    def uniform(cls, team_size: int, action_count: int) -> "ProductPolicy":
        return cls(np.full((team_size, action_count), 1.0 / action_count))

    @classmethod
    def deterministic(cls, actions: Sequence[int], action_count: int) -> "ProductPolicy":
        dists = np.zeros((len(actions), action_count))
        dists[np.arange(len(actions)), list(actions)] = 1.0
        return cls(dists)

    @property
    def team_size(self) -> int:
        return self.dists.shape[0]

    @property
    def action_count(self) -> int:
        return self.dists.shape[1]

    def joint(self) -> np.ndarray:
        """Probability of every joint action, in index order."""
        p = self.dists[0]
        for d in self.dists[1:]:
            p = np.outer(p, d).ravel()
        return p

    def prob(self, actions: Sequence[int]) -> float:
        return float(np.prod(self.dists[np.arange(self.team_size), list(actions)]))

    def copy(self) -> "ProductPolicy":
        return ProductPolicy(self.dists.copy())

    def to_mixture(self) -> "MixturePolicy":
        return MixturePolicy([self], [1.0])

    def __eq__(self, other):
        return isinstance(other, ProductPolicy) and np.array_equal(self.dists, other.dists)

    def __repr__(self):
        return f"ProductPolicy({np.round(self.dists, 4).tolist()})"


class MixturePolicy:
    """A weighted population of product policies."""

    def __init__(self, members: Sequence[ProductPolicy], weights=None):
        members = list(members)
        if not members:
            raise ConfigurationError("a mixture needs at least one member")
        if weights is None:
            weights = np.full(len(members), 1.0 / len(members))
        weights = np.asarray(weights, dtype=float)
        if len(weights) != len(members):
            raise ConfigurationError("members and weights differ in length")
        check_weights(weights)
        shape = members[0].dists.shape
        if any(m.dists.shape != shape for m in members):
            raise ConfigurationError("mixture members have inconsistent shapes")
        self.members = members
        self.weights = weights

    @property
    def team_size(self) -> int:
        return self.members[0].team_size

    @property
    def action_count(self) -> int:
        return self.members[0].action_count

    def joint(self) -> np.ndarray:
        out = np.zeros(self.action_count ** self.team_size)
        for w, m in zip(self.weights, self.members):
            if w > 0:
                out += w * m.joint()
        return out

    def __len__(self):
        return len(self.members)

    def __repr__(self):
        return f"MixturePolicy(n={len(self.members)}, weights={np.round(self.weights, 4).tolist()})"


def as_mixture(policy) -> MixturePolicy:
    if isinstance(policy, MixturePolicy):
        return policy
    if isinstance(policy, ProductPolicy):
        return policy.to_mixture()
    raise ConfigurationError(f"expected a policy, got {type(policy).__name__}")


def joint_distribution(game: TeamGame, policy) -> np.ndarray:
    """Joint-action distribution of a product or mixture policy for ``game``."""
    policy = as_mixture(policy)
    if (policy.team_size, policy.action_count) != (game.team_size, game.action_count):
        raise ConfigurationError(
            f"policy is {policy.team_size}x{policy.action_count}, "
            f"game is {game.team_size}x{game.action_count}")
    return policy.joint()


def expected_utility(game: TeamGame, row, col) -> float:
    """Team 1's exact expected payoff when ``row`` faces ``col``."""
    p = joint_distribution(game, row)
    q = joint_distribution(game, col)
    return float(p @ game.values(q))


def team_best_response(game: TeamGame, opponent) -> tuple[tuple, float]:
    """Best joint pure strategy against ``opponent`` (ties: lowest joint action)."""
    values = game.values(joint_distribution(game, opponent))
    idx = int(np.argmax(values))
    return game.joint_action(idx), float(values[idx])


def team_exploitability(game: TeamGame, row, col=None) -> float:
    """Sum over both teams of the opposing team best response's payoff.

    With a single policy the same mixture plays both roles.
    """
    if col is None:
        col = row
    p = joint_distribution(game, row)
    q = joint_distribution(game, col)
    return float(np.max(game.values(q)) + np.max(-game.row_values(p)))


def win_probability(game: TeamGame, row, col) -> tuple[float, float, float]:
    """Exact (win, draw, lose) probabilities for team 1; win means U > 0."""
    p = joint_distribution(game, row)
    q = joint_distribution(game, col)
    win_mask, draw_mask, lose_mask = game.outcome_masks
    win = float(p @ win_mask @ q)
    draw = float(p @ draw_mask @ q)
    lose = float(p @ lose_mask @ q)
    total = win + draw + lose
    return win / total, draw / total, lose / total
