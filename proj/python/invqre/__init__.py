"""Logit quantal response equilibria and inverse game design."""

from ._core import (
    AssumptionReport,
    DesignResult,
    Game,
    InvqreError,
    SolveOutcome,
    check_assumption,
    collision_scenario,
    fair_game,
    implicit_gradient,
    logit_response,
    margin_constraints,
    objective,
    project_feasible,
    run_projected_gradient,
    simulate_gumbel_choice,
    solve_equilibrium,
    solve_min_norm_design,
    stationarity_residual,
    sweep_epsilon_csv,
)

__all__ = [
    "AssumptionReport",
    "DesignResult",
    "Game",
    "InvqreError",
    "SolveOutcome",
    "check_assumption",
    "collision_scenario",
    "fair_game",
    "implicit_gradient",
    "logit_response",
    "margin_constraints",
    "objective",
    "project_feasible",
    "run_projected_gradient",
    "simulate_gumbel_choice",
    "solve_equilibrium",
    "solve_min_norm_design",
    "stationarity_residual",
    "sweep_epsilon_csv",
]
