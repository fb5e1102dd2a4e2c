"""
Evaluation harness: tiered initial bags, seeded trials, suites and result
tables.
"""

from shakingbot_sim.harness.experiments import (
    adjustment_mechanism_experiment,
    generalization_configs,
    held_scene,
    run_generalization,
    shaking_mechanism_experiment,
)
from shakingbot_sim.harness.models import (
    REAL_ROBOT_REFERENCE,
    TIERS,
    HarnessConfig,
    MechanismResult,
    Method,
    ResultRow,
    SuiteResult,
    TierGenerationError,
    TrialConfig,
    TrialRecord,
)
from shakingbot_sim.harness.reporting import (
    ClaimResult,
    aggregate,
    check_directional_claims,
    format_claims,
    format_results_table,
    mean_std,
    write_results_csv,
)
from shakingbot_sim.harness.runners import (
    build_controller,
    run_suite,
    run_trial,
    suite_configs,
    to_json_line,
)
from shakingbot_sim.harness.tiers import (
    TIER_RECIPES,
    gen_tier,
    handle_components,
    perturb,
    rim_area_ratio,
    tier_predicate,
)

__all__ = [
    # Models
    "HarnessConfig",
    "MechanismResult",
    "Method",
    "ResultRow",
    "SuiteResult",
    "TrialConfig",
    "TrialRecord",
    "REAL_ROBOT_REFERENCE",
    "TIERS",
    # Errors
    "TierGenerationError",
    # Tiers
    "TIER_RECIPES",
    "gen_tier",
    "handle_components",
    "perturb",
    "rim_area_ratio",
    "tier_predicate",
    # Running
    "build_controller",
    "run_suite",
    "run_trial",
    "suite_configs",
    "to_json_line",
    # Reporting
    "ClaimResult",
    "aggregate",
    "check_directional_claims",
    "format_claims",
    "format_results_table",
    "mean_std",
    "write_results_csv",
    # Experiments
    "adjustment_mechanism_experiment",
    "generalization_configs",
    "held_scene",
    "run_generalization",
    "shaking_mechanism_experiment",
]
