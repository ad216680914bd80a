"""Exact solvers and information-relaxation dual bounds for finite dynamic
zero-sum games.

Player A maximizes and player B minimizes the same expected total cost.
``games`` holds the data model, ``matrix_games`` the per-state minimax LP
kernel, ``solvers`` the exact machinery (Shapley value iteration, best
responses, naive policy iteration, sandwich intervals), ``duality`` the
Monte Carlo dual bounds, ``builtin_games`` two ready-made benchmark games
and ``experiments``/``cli`` the reproduction pipeline.
"""

from .builtin_games import (
    WasteGameConfig,
    build_two_period_matrix_game,
    build_waste_inspection_game,
    detection_probability,
    first_action_value_generator,
    suboptimal_minimizer_policy,
    uniform_policy,
)
from .duality import (
    AbsContinuityViolation,
    CellBudgetExceeded,
    DualBounds,
    DualEstimate,
    PathCapExceeded,
    ReferenceMeasure,
    SupportViolation,
    dual_sandwich,
    estimate_dual_bound_finite,
    estimate_dual_bound_ssp,
    exact_dual_bound_enumeration,
    inverse_cdf_transition,
    make_penalty_term,
    make_uniform_reference,
    pi_inner_finite,
    scenario_rng,
    simulate_q_path,
    validate_abs_continuity,
    weak_form_inner_ssp,
)
from .games import (
    PLAYER_A,
    PLAYER_B,
    Discounted,
    FiniteHorizon,
    GameModel,
    MdpView,
    MixedPolicy,
    Ssp,
    check_policy,
    embed_finite_horizon,
    fix_player,
    game_from_dict,
    game_to_dict,
    lift_policy,
    load_game,
    make_game,
    make_policy,
    policy_from_dict,
    pure_policy,
    stage_cost_mixed,
    transition_mixed,
    validate,
    values_from_dict,
)
from .matrix_games import MatrixGameSolution, solve, value_of
from .solvers import (
    ImproperPair,
    NoConvergence,
    PolicyIterationTrace,
    SandwichResult,
    UnboundedValue,
    best_response,
    evaluate_policy_pair,
    naive_policy_iteration,
    sandwich,
    shapley_backup,
    shapley_value_iteration,
    solve_view,
    stage_game_matrix,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
