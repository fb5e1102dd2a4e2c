"""Test aggregation and reporting of trial records."""

import csv
import math
from pathlib import Path

import pytest

from shakingbot_sim.harness import (
    Method,
    ResultRow,
    TrialRecord,
    aggregate,
    check_directional_claims,
    format_claims,
    format_results_table,
    mean_std,
    write_results_csv,
)
from shakingbot_sim.harness.reporting import CSV_COLUMNS, row_cells


def _make_record(
    tier: int = 1,
    method: Method = Method.SHAKINGBOT,
    seed: int = 0,
    placed: int = 0,
    actions: int = 5,
    failure_reason: str | None = None,
) -> TrialRecord:
    return TrialRecord(
        method=method,
        tier=tier,
        seed=seed,
        open_bag=placed > 0,
        placed=placed,
        partial=placed > 0,
        full=placed > 1,
        actions=actions,
        sim_time=10.0 * actions,
        failure_reason=failure_reason,
    )


def _make_row(
    tier: int,
    method: Method,
    open_bag: int = 4,
    full: int = 4,
    actions: float = 8.0,
) -> ResultRow:
    return ResultRow(
        tier=tier,
        method=method,
        trials=8,
        open_bag=open_bag,
        placed_mean=1.0,
        placed_std=0.5,
        partial=full,
        full=full,
        actions_mean=actions,
        actions_std=1.0,
        time_mean=100.0,
        time_std=10.0,
    )


class TestAggregate:
    """Tests for mean_std and aggregate."""

    def test_sample_std(self) -> None:
        mean, std = mean_std([2, 0])
        assert mean == 1.0
        assert std == pytest.approx(math.sqrt(2.0))

    def test_single_and_empty(self) -> None:
        assert mean_std([3.0]) == (3.0, 0.0)
        assert all(math.isnan(v) for v in mean_std([]))

    def test_placed_formatting(self) -> None:
        records = [_make_record(seed=0, placed=2), _make_record(seed=1, placed=0)]
        [row] = aggregate(records)
        open_bag, placed, partial, full, _, _ = row_cells(row)
        assert placed == "1.0±1.4"
        assert open_bag == "1/2"
        assert partial == "1/2"
        assert full == "1/2"

    def test_twelve_cells(self) -> None:
        records = [
            _make_record(tier, method, seed)
            for tier in (3, 1, 2)
            for method in Method
            for seed in range(8)
        ]
        rows = aggregate(records)
        assert len(records) == 96
        assert len(rows) == 12
        assert [(r.tier, r.method) for r in rows[:4]] == [(1, m) for m in Method]
        assert all(r.trials == 8 for r in rows)

    def test_order_independent(self) -> None:
        records = [_make_record(seed=s, placed=s % 3, actions=s) for s in range(6)]
        assert aggregate(records) == aggregate(list(reversed(records)))

    def test_failed_trials_skip_actions_and_time(self) -> None:
        records = [
            _make_record(seed=0, actions=6),
            _make_record(seed=1, actions=0, failure_reason="diverged"),
        ]
        [row] = aggregate(records)
        assert row.trials == 2
        assert row.failed == 1
        assert row.actions_mean == 6.0
        assert row.time_mean == 60.0

    def test_all_failed_shows_not_available(self) -> None:
        [row] = aggregate([_make_record(actions=0, failure_reason="x")])
        assert row_cells(row)[4] == "N/A"


class TestFormatting:
    """Tests for the text table and CSV output."""

    def test_table_columns(self) -> None:
        table = format_results_table([_make_row(1, Method.SHAKINGBOT)])
        header = table.splitlines()[0]
        for column in ("Tiers", "Open Bag", "Partial Succ.", "Full Succ.", "Time"):
            assert column in header
        assert "Tier 1" in table
        assert "ShakingBot" in table
        assert "real robot" in table
        assert "178.5±15.7" in table

    def test_table_without_reference(self) -> None:
        table = format_results_table(
            [_make_row(1, Method.SHAKINGBOT)], reference=False
        )
        assert "real robot" not in table
        assert len(table.splitlines()) == 3

    def test_table_is_aligned(self) -> None:
        rows = [_make_row(1, Method.SHAKINGBOT), _make_row(1, Method.SHAKINGBOT_A)]
        lines = format_results_table(rows, reference=False).splitlines()
        starts = {line.index("4/8") for line in lines[2:]}
        assert len(starts) == 1

    def test_csv(self, tmp_path: Path) -> None:
        path = tmp_path / "out" / "results.csv"
        write_results_csv(
            [_make_row(1, Method.SHAKINGBOT), _make_row(2, Method.SHAKINGBOT_H)], path
        )
        with path.open(encoding="utf-8", newline="") as f:
            rows = list(csv.DictReader(f))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 2
        assert rows[1]["method"] == "shakingbot_H"
        assert rows[0]["open_bag"] == "4/8"
        assert rows[0]["actions"] == "8.0±1.0"


class TestDirectionalClaims:
    """Tests for check_directional_claims."""

    def _make_table(self) -> list[ResultRow]:
        return [
            _make_row(1, Method.SHAKINGBOT, open_bag=7, actions=7.0),
            _make_row(1, Method.ANALYTIC_PRIMITIVES, open_bag=2),
            _make_row(2, Method.SHAKINGBOT, open_bag=6, full=6, actions=9.0),
            _make_row(2, Method.SHAKINGBOT_A, full=2),
            _make_row(2, Method.SHAKINGBOT_H, full=0),
            _make_row(2, Method.ANALYTIC_PRIMITIVES, open_bag=1),
            _make_row(3, Method.SHAKINGBOT, open_bag=4, actions=12.0),
            _make_row(3, Method.ANALYTIC_PRIMITIVES, open_bag=0),
        ]

    def test_all_hold(self) -> None:
        claims = check_directional_claims(self._make_table())
        assert [c.holds for c in claims] == [True, True, True]

    def test_tier_ordering_violated(self) -> None:
        rows = self._make_table()
        rows[6] = _make_row(3, Method.SHAKINGBOT, open_bag=4, actions=5.0)
        tier, ablation, method = check_directional_claims(rows)
        assert tier.holds is False
        assert ablation.holds and method.holds

    def test_ablation_violated(self) -> None:
        rows = self._make_table()
        rows[3] = _make_row(2, Method.SHAKINGBOT_A, full=7)
        assert check_directional_claims(rows)[1].holds is False

    def test_baseline_violated(self) -> None:
        rows = self._make_table()
        rows[1] = _make_row(1, Method.ANALYTIC_PRIMITIVES, open_bag=8)
        assert check_directional_claims(rows)[2].holds is False

    def test_missing_cells_are_untested(self) -> None:
        claims = check_directional_claims([_make_row(1, Method.SHAKINGBOT)])
        assert [c.holds for c in claims] == [None, None, None]
        assert "not tested" in format_claims(claims)
