"""Band balancing policies: PMLB and the comparison baselines."""

from .baselines import RuleBasedParams, baseline_a2_mlb, baseline_no_mlb, baseline_rule_based
from .config import BalanceDecision, BalancerConfig, InsufficientObservations, LoadWindow
from .instances import Instance, camped_instance
from .pmlb import (
    Prefilter,
    build_lp,
    estimate_expected_loads,
    normalizers,
    pmlb_step,
    prefilter_infeasible,
    scalarized,
    solve_relaxation,
    split_solution,
    symmetrize,
)
from .rounding import RepairError, repair, round_deterministic, round_probabilistic

__all__ = [
    "BalanceDecision",
    "BalancerConfig",
    "Instance",
    "InsufficientObservations",
    "LoadWindow",
    "Prefilter",
    "RepairError",
    "RuleBasedParams",
    "baseline_a2_mlb",
    "baseline_no_mlb",
    "baseline_rule_based",
    "build_lp",
    "estimate_expected_loads",
    "camped_instance",
    "normalizers",
    "pmlb_step",
    "prefilter_infeasible",
    "repair",
    "round_deterministic",
    "round_probabilistic",
    "scalarized",
    "solve_relaxation",
    "split_solution",
    "symmetrize",
]
