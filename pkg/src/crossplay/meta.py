"""Population payoff tables and meta-solvers."""

from __future__ import annotations

import json
import logging

import numpy as np
from scipy.optimize import linprog

from .game import ProductPolicy, TeamGame, joint_distribution, win_probability
from .validation import ConfigurationError, check_matrix

logger = logging.getLogger(__name__)

NASH_TOL = 1e-6


class NashSolverError(RuntimeError):
    """The meta-solver could not certify an equilibrium within tolerance."""

    def __init__(self, message, row=None, col=None, gap=None):
        super().__init__(message)
        self.row, self.col, self.gap = row, col, gap


class PayoffTable:
    """Exact payoffs between a row and a column population.

    ``matrix[i, j]`` is the row policy ``i``'s expected utility against column
    policy ``j``. Appending policies only evaluates the new row/column, and
    every entry is computed the same way, so the incremental table is
    bit-for-bit equal to a fresh one.
    """

    def __init__(self, game: TeamGame, rows=(), cols=()):
        self.game = game
        self.rows, self.cols = [], []
        self._row_joint, self._col_joint, self._col_values = [], [], []
        self.matrix = np.zeros((0, 0))
        self.extend(rows, cols)

    def _entry(self, i: int, j: int) -> float:
        if self.game.symmetric and self.rows[i] is self.cols[j]:
            return 0.0
        return float(np.dot(self._row_joint[i], self._col_values[j]))

    def extend(self, rows=(), cols=()):
        r_old, c_old = len(self.rows), len(self.cols)
        self.rows += list(rows)
        self.cols += list(cols)
        self._row_joint += [joint_distribution(self.game, p) for p in rows]
        new_c = [joint_distribution(self.game, p) for p in cols]
        self._col_joint += new_c
        self._col_values += [self.game.values(c) for c in new_c]
        out = np.zeros((len(self.rows), len(self.cols)))
        out[:r_old, :c_old] = self.matrix
        for i in range(len(self.rows)):
            for j in range(c_old if i < r_old else 0, len(self.cols)):
                out[i, j] = self._entry(i, j)
        self.matrix = out
        return self

    def row_mixture_joint(self, weights) -> np.ndarray:
        return np.asarray(weights) @ np.array(self._row_joint)

    def col_mixture_joint(self, weights) -> np.ndarray:
        return np.asarray(weights) @ np.array(self._col_joint)

    @property
    def shape(self):
        return self.matrix.shape

    def to_json(self, row_ids=None, col_ids=None) -> str:
        row_ids = row_ids or [f"r{i}" for i in range(len(self.rows))]
        col_ids = col_ids or [f"c{j}" for j in range(len(self.cols))]
        return json.dumps({"rows": row_ids, "cols": col_ids,
                           "matrix": self.matrix.tolist()})


def fill_payoffs(game: TeamGame, row_pop, col_pop) -> PayoffTable:
    if not row_pop or not col_pop:
        raise ConfigurationError("populations must be non-empty")
    return PayoffTable(game, row_pop, col_pop)


def _as_matrix(table) -> np.ndarray:
    return check_matrix(table.matrix if isinstance(table, PayoffTable) else table, "payoff table")


def solve_uniform(table) -> np.ndarray:
    n = _as_matrix(table).shape[0]
    return np.full(n, 1.0 / n)


def nash_gap(a: np.ndarray, row: np.ndarray, col: np.ndarray) -> float:
    """Restricted-game exploitability: best pure row gain plus best pure column gain."""
    a = np.asarray(a, dtype=float)
    return float(np.max(a @ col) - np.min(row @ a))


def _lp_row_strategy(a: np.ndarray) -> np.ndarray:
    """Maximin mixed strategy of the row player by linear programming."""
    m, n = a.shape
    # variables: x_1..x_m, v; maximise v subject to x^T a >= v
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-a.T, np.ones((n, 1))])
    b_ub = np.zeros(n)
    a_eq = np.hstack([np.ones((1, m)), np.zeros((1, 1))])
    bounds = [(0, None)] * m + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if not res.success:
        raise NashSolverError(f"LP failed: {res.message}")
    x = np.clip(res.x[:m], 0.0, None)
    return x / x.sum()


def _spread(weights: np.ndarray, group: np.ndarray) -> np.ndarray:
    counts = np.bincount(group, minlength=len(weights))
    return weights[group] / counts[group]


def solve_nash_zero_sum(table, tol: float = NASH_TOL):
    """Equilibrium of the restricted zero-sum game, certified to ``tol``.

    Returns ``(row_weights, col_weights, value)``. Raises :class:`NashSolverError`
    carrying the best candidate when the certificate exceeds ``tol``.
    """
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    a = _as_matrix(table)
    # identical strategies are merged before solving and share their weight evenly
    _, row_first, row_of = np.unique(a, axis=0, return_index=True, return_inverse=True)
    _, col_first, col_of = np.unique(a, axis=1, return_index=True, return_inverse=True)
    row_of, col_of = row_of.ravel(), col_of.ravel()
    reduced = a[np.ix_(row_first, col_first)]
    row = _lp_row_strategy(reduced)
    # a symmetric zero-sum game shares one equilibrium strategy between the players
    symmetric = reduced.shape[0] == reduced.shape[1] and np.array_equal(reduced, -reduced.T)
    col = row if symmetric else _lp_row_strategy(-reduced.T)
    row, col = _spread(row, row_of), _spread(col, col_of)
    gap = nash_gap(a, row, col)
    if gap > tol:
        raise NashSolverError(f"equilibrium gap {gap:.3g} exceeds tolerance {tol:.3g}",
                              row=row, col=col, gap=gap)
    return row, col, float(row @ a @ col)


def _normalise_scores(scores: np.ndarray) -> np.ndarray:
    total = scores.sum()
    if total <= 0:
        return np.full(len(scores), 1.0 / len(scores))
    return scores / total


def prioritized_scores_main(game: TeamGame, current: ProductPolicy, pop) -> np.ndarray:
    """Weights proportional to each opponent's win rate against ``current``."""
    if not pop:
        raise ConfigurationError("population must be non-empty")
    scores = np.array([win_probability(game, p, current)[0] for p in pop])
    return _normalise_scores(scores)


def prioritized_scores_counter(game: TeamGame, current: ProductPolicy, pop) -> np.ndarray:
    """Weights proportional to win rate times lose rate against ``current``.

    Favours opponents of roughly the same strength as ``current``.
    """
    if not pop:
        raise ConfigurationError("population must be non-empty")
    scores = []
    for p in pop:
        win, _, lose = win_probability(game, p, current)
        scores.append(win * lose)
    return _normalise_scores(np.array(scores))


META_SOLVERS = ("uniform", "nash", "prioritized")
