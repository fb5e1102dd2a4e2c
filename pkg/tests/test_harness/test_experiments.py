"""Test the mechanism experiments and the generalisation sweep."""

import math
from typing import Optional

import pytest

from shakingbot_sim.bag_model import GripperId
from shakingbot_sim.harness import (
    MechanismResult,
    TrialConfig,
    TrialRecord,
    adjustment_mechanism_experiment,
    generalization_configs,
    held_scene,
    run_generalization,
    shaking_mechanism_experiment,
)
from shakingbot_sim.harness.experiments import RED_BODY, UNSEEN_SIZE
from shakingbot_sim.utils.file_utils import PathLike
from tests.conftest import SMALL_SPEC


def _stub_runner(config: TrialConfig, log_path: Optional[PathLike]) -> TrialRecord:
    placed = 2 if config.seed == 0 else 0
    return TrialRecord(
        method=config.method,
        tier=config.tier,
        seed=config.seed,
        open_bag=placed > 0,
        placed=placed,
        partial=placed > 0,
        full=placed > 0,
        actions=4,
        sim_time=100.0,
        budget=config.budget,
    )


class TestGeneralizationConfigs:
    """Tests for generalization_configs."""

    def test_cases_and_seeds(self) -> None:
        cases = generalization_configs(TrialConfig(), trials=3)
        assert set(cases) == {"unseen_size", "unseen_pattern", "red_color"}
        for configs in cases.values():
            assert [c.seed for c in configs] == [0, 1, 2]

    def test_each_case_changes_one_thing(self) -> None:
        base = TrialConfig()
        cases = generalization_configs(base, trials=1)
        [size] = cases["unseen_size"]
        assert (size.bag.width, size.bag.height) == UNSEEN_SIZE
        assert size.pattern is None and size.body_color is None
        [pattern] = cases["unseen_pattern"]
        assert pattern.pattern == "stripes"
        assert pattern.bag == base.bag
        [color] = cases["red_color"]
        assert color.body_color == RED_BODY
        assert color.bag == base.bag


def test_run_generalization_aggregates_each_case() -> None:
    rows = run_generalization(TrialConfig(), trials=3, runner=_stub_runner)
    assert set(rows) == {"unseen_size", "unseen_pattern", "red_color"}
    for row in rows.values():
        assert row.trials == 3
        assert row.full == 1
        assert row.actions_mean == 4.0


@pytest.mark.slow
class TestMechanisms:
    """Structural checks of the paired experiments on a small bag."""

    def test_held_scene_grasps_both_handles(self) -> None:
        scene = held_scene(SMALL_SPEC, 0)
        assert set(scene.state.attachments) == {GripperId.LEFT, GripperId.RIGHT}

    def test_shaking_experiment(self) -> None:
        result = shaking_mechanism_experiment(SMALL_SPEC, seeds=(0,))
        assert isinstance(result, MechanismResult)
        assert result.seeds == (0,)
        assert len(result.control) == len(result.treatment) == 1
        assert all(v >= 0.0 for v in result.control + result.treatment)

    def test_adjustment_experiment(self) -> None:
        result = adjustment_mechanism_experiment(SMALL_SPEC, seeds=(1,))
        assert result.quantity == "rim_separation"
        assert len(result.deltas) == 1
        assert math.isfinite(result.mean_delta)


@pytest.mark.slow
class TestMechanismDirections:
    """Paired effects over sixteen seeds on the default bag."""

    def test_fast_shaking_opens_wider_than_slow(self) -> None:
        result = shaking_mechanism_experiment(seeds=range(16))
        assert len(result.deltas) == 16
        assert result.mean_delta > 0.0
        assert result.holds

    def test_adjustment_separates_rim_layers(self) -> None:
        result = adjustment_mechanism_experiment(seeds=range(16))
        assert len(result.deltas) == 16
        assert result.mean_delta > 0.0
        assert result.holds
