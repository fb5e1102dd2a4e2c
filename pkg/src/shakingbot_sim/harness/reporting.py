"""
Functions for aggregating trial records into result tables and reporting them.
"""

import csv
import logging
import math
from collections import defaultdict
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
import structlog

from shakingbot_sim.harness.models import (
    REAL_ROBOT_REFERENCE,
    Method,
    ResultRow,
    TrialRecord,
)
from shakingbot_sim.log_utils import log_function_call
from shakingbot_sim.utils.file_utils import PathLike, ensure_parent_dir

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

TABLE_COLUMNS = (
    "Tiers",
    "Method",
    "Open Bag",
    "Placed",
    "Partial Succ.",
    "Full Succ.",
    "Actions",
    "Time (Sec.)",
)
CSV_COLUMNS = (
    "tier",
    "method",
    "trials",
    "open_bag",
    "placed",
    "partial_succ",
    "full_succ",
    "actions",
    "time_s",
    "failed",
    "placed_mean",
    "placed_std",
    "actions_mean",
    "actions_std",
    "time_mean",
    "time_std",
)
NOT_AVAILABLE = "N/A"
REFERENCE_LABEL = "  real robot"
COLUMN_GAP = "  "


class ClaimResult(NamedTuple):
    """Outcome of one directional comparison; ``holds`` is None when untested."""

    name: str
    holds: Optional[bool]
    detail: str


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation; NaN for no values, std 0 for one."""
    if not values:
        return math.nan, math.nan
    data = np.asarray(values, dtype=np.float64)
    std = float(data.std(ddof=1)) if data.size > 1 else 0.0
    return float(data.mean()), std


def format_count(count: int, total: int) -> str:
    return f"{count}/{total}"


def format_mean_std(mean: float, std: float) -> str:
    if math.isnan(mean):
        return NOT_AVAILABLE
    return f"{mean:.1f}±{std:.1f}"


def aggregate(records: Iterable[TrialRecord]) -> list[ResultRow]:
    """
    One row per (tier, method) cell, ordered by tier and then method.

    Records are sorted by seed inside each cell before reduction. Actions and
    time are averaged over the trials that ran to their end.
    """
    cells: dict[tuple[int, Method], list[TrialRecord]] = defaultdict(list)
    for record in records:
        cells[(record.tier, record.method)].append(record)

    methods = list(Method)
    rows = []
    for tier, method in sorted(cells, key=lambda c: (c[0], methods.index(c[1]))):
        cell = sorted(cells[(tier, method)], key=lambda r: r.seed)
        completed = [r for r in cell if not r.failed]
        placed = mean_std([r.placed for r in cell])
        actions = mean_std([r.actions for r in completed])
        sim_time = mean_std([r.sim_time for r in completed])
        rows.append(
            ResultRow(
                tier=tier,
                method=method,
                trials=len(cell),
                open_bag=sum(r.open_bag for r in cell),
                placed_mean=placed[0],
                placed_std=placed[1],
                partial=sum(r.partial for r in cell),
                full=sum(r.full for r in cell),
                actions_mean=actions[0],
                actions_std=actions[1],
                time_mean=sim_time[0],
                time_std=sim_time[1],
                failed=len(cell) - len(completed),
            )
        )
    return rows


def row_cells(row: ResultRow) -> tuple[str, ...]:
    """The table columns of a row after Tiers and Method."""
    return (
        format_count(row.open_bag, row.trials),
        format_mean_std(row.placed_mean, row.placed_std),
        format_count(row.partial, row.trials),
        format_count(row.full, row.trials),
        format_mean_std(row.actions_mean, row.actions_std),
        format_mean_std(row.time_mean, row.time_std),
    )


def format_results_table(rows: Sequence[ResultRow], reference: bool = True) -> str:
    """
    Aligned text table with one line per cell.

    With ``reference`` each cell that has a real-robot counterpart is followed
    by a line holding those values for context. Time is simulated seconds.
    """
    lines: list[tuple[str, ...]] = [TABLE_COLUMNS]
    for row in rows:
        lines.append((f"Tier {row.tier}", row.method.label, *row_cells(row)))
        known = REAL_ROBOT_REFERENCE.get((row.tier, row.method))
        if reference and known is not None:
            lines.append(("", REFERENCE_LABEL, *known))

    widths = [max(len(line[k]) for line in lines) for k in range(len(TABLE_COLUMNS))]
    rule = "-" * (sum(widths) + len(COLUMN_GAP) * (len(widths) - 1))
    text = [
        COLUMN_GAP.join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
        for line in lines
    ]
    return "\n".join([text[0], rule, *text[1:]]) + "\n"


@log_function_call
def write_results_csv(rows: Sequence[ResultRow], path: PathLike) -> None:
    """Write the table, formatted and raw columns side by side."""
    target = ensure_parent_dir(path)
    with target.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(
            f, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            open_bag, placed, partial, full, actions, time_s = row_cells(row)
            writer.writerow(
                {
                    "tier": row.tier,
                    "method": row.method.value,
                    "trials": row.trials,
                    "open_bag": open_bag,
                    "placed": placed,
                    "partial_succ": partial,
                    "full_succ": full,
                    "actions": actions,
                    "time_s": time_s,
                    "failed": row.failed,
                    "placed_mean": row.placed_mean,
                    "placed_std": row.placed_std,
                    "actions_mean": row.actions_mean,
                    "actions_std": row.actions_std,
                    "time_mean": row.time_mean,
                    "time_std": row.time_std,
                }
            )


def _find(rows: Sequence[ResultRow], tier: int, method: Method) -> Optional[ResultRow]:
    return next((r for r in rows if r.tier == tier and r.method is method), None)


def _tier_ordering(rows: Sequence[ResultRow]) -> ClaimResult:
    name = "ShakingBot actions non-decreasing in tier"
    cells = [_find(rows, tier, Method.SHAKINGBOT) for tier in (1, 2, 3)]
    present = [c for c in cells if c is not None and not math.isnan(c.actions_mean)]
    if len(present) < 2:
        return ClaimResult(name, None, "fewer than two tiers with ShakingBot actions")
    means = [c.actions_mean for c in present]
    holds = all(a <= b for a, b in zip(means, means[1:]))
    detail = " <= ".join(f"tier {c.tier}: {c.actions_mean:.2f}" for c in present)
    return ClaimResult(name, holds, detail)


def _ablation_ordering(rows: Sequence[ResultRow], tier: int = 2) -> ClaimResult:
    name = f"ShakingBot full success >= each ablation on tier {tier}"
    full = _find(rows, tier, Method.SHAKINGBOT)
    ablations = [
        a
        for a in (
            _find(rows, tier, Method.SHAKINGBOT_A),
            _find(rows, tier, Method.SHAKINGBOT_H),
        )
        if a is not None
    ]
    if full is None or not ablations:
        return ClaimResult(
            name, None, f"no ShakingBot and ablation rows on tier {tier}"
        )
    holds = all(full.rate("full") >= a.rate("full") for a in ablations)
    detail = ", ".join(
        f"{r.method.label}: {r.rate('full'):.2f}" for r in [full, *ablations]
    )
    return ClaimResult(name, holds, detail)


def _method_ordering(rows: Sequence[ResultRow]) -> ClaimResult:
    name = "ShakingBot open-bag rate >= analytic baseline on every tier"
    compared: list[tuple[int, ResultRow, ResultRow]] = []
    for tier in (1, 2, 3):
        ours = _find(rows, tier, Method.SHAKINGBOT)
        baseline = _find(rows, tier, Method.ANALYTIC_PRIMITIVES)
        if ours is not None and baseline is not None:
            compared.append((tier, ours, baseline))
    if not compared:
        return ClaimResult(name, None, "no tier has both ShakingBot and baseline rows")
    holds = all(s.rate("open_bag") >= b.rate("open_bag") for _, s, b in compared)
    detail = ", ".join(
        f"tier {t}: {s.rate('open_bag'):.2f} vs {b.rate('open_bag'):.2f}"
        for t, s, b in compared
    )
    return ClaimResult(name, holds, detail)


def check_directional_claims(rows: Sequence[ResultRow]) -> list[ClaimResult]:
    """Evaluate the tier, ablation and baseline orderings on a result table."""
    claims = [_tier_ordering(rows), _ablation_ordering(rows), _method_ordering(rows)]
    for claim in claims:
        if claim.holds is False:
            structured_logger.warning(
                "Directional claim does not hold", claim=claim.name, detail=claim.detail
            )
    return claims


def format_claims(claims: Sequence[ClaimResult]) -> str:
    status = {True: "holds", False: "FAILS", None: "not tested"}
    return "".join(f"[{status[c.holds]}] {c.name} ({c.detail})\n" for c in claims)
