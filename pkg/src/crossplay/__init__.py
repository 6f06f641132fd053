"""Exact learning dynamics for two-team zero-sum matrix games.

Self-play, fictitious self-play, PSRO, online double oracle and fictitious
cross-play on team games, with exact payoffs, best responses and
exploitability computed by enumeration.
"""

from .evaluation import (EloTable, ExperimentConfig, fit_bradley_terry, load_policy,
                         run_experiment, theorem_check, tournament)
from .game import (MixturePolicy, ProductPolicy, TeamGame, expected_utility, team_best_response,
                   team_exploitability, win_probability)
from .games import (MotivatingParams, SadParams, load_matrix_game, make_game, make_motivating,
                    make_sad, make_team_rps, motivating_delta_q, sad_exploitability,
                    sad_reference_policies)
from .learners import compute_q, check_preference_preservation, theorem1_threshold
from .meta import NashSolverError, PayoffTable, fill_payoffs, solve_nash_zero_sum, solve_uniform
from .trainers import (PSRO, FictitiousCrossPlay, FictitiousSelfPlay, FixedOpponent,
                       OnlineDoubleOracle, RunRecord, SelfPlay, TrainConfig, detect_plateau,
                       run_fsp, run_fxp, run_odo, run_psro, run_sp)
from .validation import ConfigurationError

__version__ = "0.1.0"
