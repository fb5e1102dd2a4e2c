"""Test running trials and suites."""

import json
from pathlib import Path
from typing import Optional

import numpy as np
import pytest

from shakingbot_sim.bag_model import BagSpec, BagState, SimulationDivergedError
from shakingbot_sim.harness import (
    HarnessConfig,
    Method,
    TierGenerationError,
    TrialConfig,
    TrialRecord,
    build_controller,
    check_directional_claims,
    run_suite,
    run_trial,
    suite_configs,
    to_json_line,
)
from shakingbot_sim.utils.file_utils import PathLike
from tests.conftest import SMALL_SPEC, make_bag

RUNNERS = "shakingbot_sim.harness.runners"


def _stub_runner(config: TrialConfig, log_path: Optional[PathLike]) -> TrialRecord:
    """Deterministic stand-in for a trial, driven by the seed only."""
    placed = config.seed % 3
    return TrialRecord(
        method=config.method,
        tier=config.tier,
        seed=config.seed,
        open_bag=placed > 0,
        placed=placed,
        partial=placed > 0,
        full=placed == 2,
        actions=min(config.tier + config.seed, config.budget),
        sim_time=float(config.seed),
        budget=config.budget,
    )


def _read_log(path: Path) -> list[dict[str, object]]:
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]


@pytest.fixture
def flat_tier(monkeypatch: pytest.MonkeyPatch) -> None:
    """Make every tier start from the small flat bag."""

    def fake_gen_tier(tier: int, spec: BagSpec, seed: int, *args: object) -> BagState:
        return make_bag(seed)

    monkeypatch.setattr(f"{RUNNERS}.gen_tier", fake_gen_tier)


class TestRunTrial:
    """Tests for run_trial."""

    @pytest.mark.usefixtures("flat_tier")
    def test_zero_budget_lifts_immediately(self, tmp_path: Path) -> None:
        log_path = tmp_path / "trial.jsonl"
        record = run_trial(TrialConfig(bag=SMALL_SPEC, budget=0), log_path)
        assert record.actions == 0
        assert record.forced_lift
        assert not record.full
        assert not record.failed

        events = _read_log(log_path)
        assert events[0]["event"] == "trial_start"
        assert events[0]["budget"] == 0
        assert any(e["event"] == "decision" for e in events)
        assert events[-1]["event"] == "trial_end"
        assert events[-1]["actions"] == 0

    @pytest.mark.usefixtures("flat_tier")
    def test_logs_are_reproducible(self, tmp_path: Path) -> None:
        config = TrialConfig(bag=SMALL_SPEC, budget=0, seed=3)
        first = run_trial(config, tmp_path / "a.jsonl")
        second = run_trial(config, tmp_path / "b.jsonl")
        assert first.to_dict() == second.to_dict()
        first_log = (tmp_path / "a.jsonl").read_bytes()
        assert first_log == (tmp_path / "b.jsonl").read_bytes()

    def test_generation_failure_becomes_record(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        def failing(tier: int, spec: BagSpec, seed: int, *args: object) -> BagState:
            raise TierGenerationError(tier, seed, 20)

        monkeypatch.setattr(f"{RUNNERS}.gen_tier", failing)
        log_path = tmp_path / "failed.jsonl"
        record = run_trial(TrialConfig(tier=3, seed=6), log_path)
        assert record.failed
        assert record.failure_reason is not None
        assert "TierGenerationError" in record.failure_reason
        assert "seed 6" in record.failure_reason
        assert not record.partial and not record.full
        assert [e["event"] for e in _read_log(log_path)] == ["trial_start", "trial_end"]

    @pytest.mark.usefixtures("flat_tier")
    def test_divergence_becomes_record(self, monkeypatch: pytest.MonkeyPatch) -> None:
        def diverge(self: object, state: BagState) -> None:
            raise SimulationDivergedError(12)

        monkeypatch.setattr(f"{RUNNERS}.ShakingBotController.run", diverge)
        record = run_trial(TrialConfig(bag=SMALL_SPEC))
        assert record.failed
        assert record.failure_reason is not None
        assert "SimulationDivergedError" in record.failure_reason
        assert not record.full

    def test_method_reaches_controller(self) -> None:
        controller = build_controller(
            TrialConfig(method=Method.SHAKINGBOT_H, budget=4, pattern="stripes")
        )
        assert not controller.variant.use_one_arm_holding
        assert controller.budget == 4
        assert controller.pattern == "stripes"


class TestRunSuite:
    """Tests for run_suite with a stubbed trial runner."""

    def test_suite_configs(self) -> None:
        configs = suite_configs(TrialConfig(), HarnessConfig())
        assert len(configs) == 96
        assert {c.seed for c in configs} == set(range(8))
        assert len({(c.tier, c.method, c.seed) for c in configs}) == 96

    def test_counts_and_sorting(self) -> None:
        result = run_suite(TrialConfig(), HarnessConfig(), runner=_stub_runner)
        assert len(result.records) == 96
        assert len(result.rows) == 12
        keys = [r.sort_key for r in result.records]
        assert keys == sorted(keys)

    def test_deterministic(self) -> None:
        harness = HarnessConfig(trials_per_cell=3)
        first = run_suite(TrialConfig(), harness, runner=_stub_runner)
        second = run_suite(TrialConfig(), harness, runner=_stub_runner)
        assert first.to_dict() == second.to_dict()

    def test_subset_of_cells(self) -> None:
        harness = HarnessConfig(
            trials_per_cell=2, tiers=(2,), methods=(Method.SHAKINGBOT,)
        )
        result = run_suite(TrialConfig(), harness, runner=_stub_runner)
        [row] = result.rows
        assert row.tier == 2
        assert row.trials == 2
        assert row.placed_mean == pytest.approx(0.5)

    def test_log_paths_follow_cells(self, tmp_path: Path) -> None:
        seen: list[Optional[PathLike]] = []

        def recording(config: TrialConfig, log_path: Optional[PathLike]) -> TrialRecord:
            seen.append(log_path)
            return _stub_runner(config, log_path)

        harness = HarnessConfig(
            trials_per_cell=1,
            tiers=(1,),
            methods=(Method.SHAKINGBOT_A,),
            log_dir=str(tmp_path),
        )
        run_suite(TrialConfig(), harness, runner=recording)
        assert seen == [tmp_path / "tier1_shakingbot_A_seed0.jsonl"]


@pytest.mark.slow
class TestFullTrials:
    """Trials on generated bags with the default budget."""

    def test_tier_two_logs_are_bit_identical(self, tmp_path: Path) -> None:
        config = TrialConfig(tier=2, seed=7)
        first = run_trial(config, tmp_path / "a.jsonl")
        second = run_trial(config, tmp_path / "b.jsonl")
        assert first.to_dict() == second.to_dict()
        first_log = (tmp_path / "a.jsonl").read_bytes()
        assert first_log == (tmp_path / "b.jsonl").read_bytes()
        assert any(e["event"] == "decision" for e in _read_log(tmp_path / "a.jsonl"))

    def test_tier_one_suite_bags_items(self) -> None:
        harness = HarnessConfig(
            trials_per_cell=8,
            workers=4,
            tiers=(1,),
            methods=(Method.SHAKINGBOT, Method.ANALYTIC_PRIMITIVES),
        )
        result = run_suite(TrialConfig(), harness)
        assert all(r.actions <= r.budget for r in result.records)
        assert all(r.partial or not r.full for r in result.records)
        ours = [r for r in result.records if r.method is Method.SHAKINGBOT]
        assert any(r.partial for r in ours)
        claims = check_directional_claims(result.rows)
        [baseline] = [c for c in claims if "analytic baseline" in c.name]
        assert baseline.holds


def test_json_line_handles_numpy() -> None:
    line = to_json_line({"b": np.float64(1.5), "a": np.arange(2)})
    assert json.loads(line) == {"a": [0, 1], "b": 1.5}
    assert line.index('"a"') < line.index('"b"')
