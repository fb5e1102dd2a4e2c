"""
Functions for running seeded trials and whole suites of them.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import structlog

from shakingbot_sim.bag_model import (
    RimInvariantError,
    SimulationDivergedError,
)
from shakingbot_sim.harness.models import (
    HarnessConfig,
    SuiteResult,
    TierGenerationError,
    TrialConfig,
    TrialRecord,
)
from shakingbot_sim.harness.reporting import aggregate
from shakingbot_sim.harness.tiers import gen_tier
from shakingbot_sim.log_utils import log_function_call
from shakingbot_sim.perception.render import BASE_COLOR
from shakingbot_sim.policy import PolicyOutcome, ShakingBotController
from shakingbot_sim.primitives import PrimitiveError
from shakingbot_sim.utils.file_utils import PathLike, write_lines

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

TrialRunner = Callable[[TrialConfig, Optional[PathLike]], TrialRecord]

# Runtime failures that end a trial early but still yield a record
TRIAL_FAILURES = (
    SimulationDivergedError,
    RimInvariantError,
    PrimitiveError,
)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return str(value)


def to_json_line(record: dict[str, Any]) -> str:
    return json.dumps(record, default=_json_default, sort_keys=True)


def trial_log_name(config: TrialConfig) -> str:
    return f"tier{config.tier}_{config.method.value}_seed{config.seed}.jsonl"


def build_controller(config: TrialConfig) -> ShakingBotController:
    """Controller configured for the trial's method."""
    return ShakingBotController(
        policy_config=replace(config.policy, thresholds=config.thresholds),
        primitive_config=config.primitives,
        perception_config=config.perception,
        variant=config.method.variant,
        items=config.items,
        budget=config.budget,
        pattern=config.pattern,
        body_color=config.body_color or BASE_COLOR,
    )


def record_from_outcome(config: TrialConfig, outcome: PolicyOutcome) -> TrialRecord:
    return TrialRecord(
        method=config.method,
        tier=config.tier,
        seed=config.seed,
        open_bag=outcome.open_bag,
        placed=outcome.placed,
        partial=outcome.partial,
        full=outcome.full,
        actions=outcome.actions,
        sim_time=outcome.sim_time,
        budget=config.budget,
        contained=outcome.contained,
        forced_lift=outcome.forced_lift,
        failure_reason=outcome.failure_reason,
        metrics_trace=list(outcome.metrics_trace),
    )


@log_function_call
def run_trial(
    config: TrialConfig, log_path: Optional[PathLike] = None
) -> TrialRecord:
    """
    Run one trial end to end and judge it.

    Generation and simulation failures do not raise; they come back as a
    record with ``failure_reason`` set.

    Args:
        config: The trial to run
        log_path: Optional JSON-lines file for the trial's event log

    Returns:
        The judged TrialRecord
    """
    bound_logger = structured_logger.bind(
        tier=config.tier, method=config.method.value, seed=config.seed
    )
    events: list[dict[str, Any]] = [{"event": "trial_start", **config.to_dict()}]
    controller = build_controller(config)
    try:
        state = gen_tier(
            config.tier,
            config.bag,
            config.seed,
            config.physics,
            config.perception.camera,
        )
        record = record_from_outcome(config, controller.run(state))
    except (TierGenerationError, *TRIAL_FAILURES) as e:
        reason = f"{type(e).__name__}: {e}"
        logger.warning(
            f"Trial tier={config.tier} method={config.method.value} "
            f"seed={config.seed} failed: {reason}"
        )
        bound_logger.warning("Trial failed", reason=reason)
        record = TrialRecord.failure(config, reason)
    if controller.scene is not None:
        events.extend(controller.scene.events)
    events.append({"event": "trial_end", **record.to_dict()})
    if log_path is not None:
        write_lines(log_path, (to_json_line(e) for e in events))
    bound_logger.info(
        "Trial finished",
        open_bag=record.open_bag,
        placed=record.placed,
        full=record.full,
        actions=record.actions,
    )
    return record


def suite_configs(base: TrialConfig, harness: HarnessConfig) -> list[TrialConfig]:
    """One config per (tier, method, seed) with seeds 0..trials_per_cell-1."""
    return [
        replace(base, tier=tier, method=method, seed=seed)
        for tier in harness.tiers
        for method in harness.methods
        for seed in range(harness.trials_per_cell)
    ]


@log_function_call
def run_suite(
    base: TrialConfig,
    harness: Optional[HarnessConfig] = None,
    runner: TrialRunner = run_trial,
) -> SuiteResult:
    """
    Run every cell of the suite and aggregate the records.

    Trials are independent; with ``workers`` > 1 they run in separate
    processes. Records are sorted by (tier, method, seed) before aggregation,
    so the table does not depend on completion order.

    Args:
        base: Settings shared by every trial; tier, method and seed are replaced
        harness: Suite settings
        runner: Function running one trial, must be picklable for workers > 1

    Returns:
        The sorted records and one ResultRow per (tier, method) cell
    """
    harness = harness or HarnessConfig()
    configs = suite_configs(base, harness)
    log_dir = Path(harness.log_dir) if harness.log_dir else None
    log_paths: list[Optional[PathLike]] = [
        log_dir / trial_log_name(c) if log_dir else None for c in configs
    ]
    structured_logger.info(
        "Suite started", trials=len(configs), workers=harness.workers
    )
    if harness.workers > 1:
        with ProcessPoolExecutor(max_workers=harness.workers) as executor:
            records = list(executor.map(runner, configs, log_paths))
    else:
        records = [runner(c, p) for c, p in zip(configs, log_paths)]
    records.sort(key=lambda r: r.sort_key)
    failed = sum(1 for r in records if r.failed)
    if failed:
        logger.warning(f"{failed} of {len(records)} trials failed")
    return SuiteResult(records=records, rows=aggregate(records))
