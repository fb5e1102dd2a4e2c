"""Test the rule policy."""

from typing import Optional

import numpy as np
import pytest

from shakingbot_sim.bag_model import Pose
from shakingbot_sim.metrics import OpeningMetrics
from shakingbot_sim.perception import Masks, Observation
from shakingbot_sim.policy import (
    BottomSensing,
    DualGrasp,
    Phase,
    PolicyConfig,
    PolicyState,
    PolicyVariant,
    decide,
    holding_height,
    shaking_height,
)
from shakingbot_sim.primitives import (
    BagAdjustment,
    DualArmShaking,
    GripperPair,
    PrimitiveConfig,
    Recenter,
    Shake,
)
from tests.conftest import make_observation

HELD_PAIR = GripperPair(Pose(-0.15, 0.0, 0.8), Pose(0.15, 0.0, 0.8), True, True)
FREE_PAIR = GripperPair(Pose(-0.5, 0.0, 0.5), Pose(0.5, 0.0, 0.5))


def _make_scene(
    rows: slice = slice(22, 42),
    cols: slice = slice(22, 42),
    handles: int = 0,
    underside: Optional[float] = None,
) -> tuple[Observation, Masks]:
    """A flat block of bag with up to two square handle patches on it."""
    depth = np.zeros((64, 64))
    depth[rows, cols] = 0.01
    under = None
    if underside is not None:
        under = np.where(depth > 0, underside, 0.0)
    handle = np.zeros((64, 64), dtype=bool)
    for corner in [(24, 24), (24, 36)][:handles]:
        handle[corner[0] : corner[0] + 4, corner[1] : corner[1] + 4] = True
    return make_observation(depth, under), Masks(handle, np.zeros_like(handle))


def _make_metrics(a_ch: float, e_ch: float) -> OpeningMetrics:
    return OpeningMetrics(np.zeros((0, 2)), 0.0, a_ch, e_ch, 0.0)


class TestGraspPhase:
    """Decisions before the handles are held."""

    def test_two_handles_give_dual_grasp(self) -> None:
        obs, masks = _make_scene(handles=2)
        ps = PolicyState()
        decision = decide(obs, masks, ps, FREE_PAIR)
        [command] = decision.commands
        assert isinstance(command, DualGrasp)
        assert command.left_point[0] < command.right_point[0]
        assert command.left_point[2] == pytest.approx(0.01)
        assert decision.next_phase is Phase.GRASP
        assert ps.actions_used == 1

    def test_no_handle_centred_bag_gives_shake(self) -> None:
        obs, masks = _make_scene()
        ps = PolicyState()
        decision = decide(obs, masks, ps, FREE_PAIR)
        [command] = decision.commands
        assert isinstance(command, Shake)
        assert command.amplitude == 0.5
        assert command.cycles == 2
        assert np.hypot(*command.grasp_point) < 0.02
        assert decision.grasp_point is not None
        assert decision.next_phase is Phase.PERCEIVE
        assert ps.actions_used == 1

    def test_one_handle_is_shaken_by_that_handle(self) -> None:
        obs, masks = _make_scene(handles=1)
        decision = decide(obs, masks, PolicyState(), FREE_PAIR)
        [command] = decision.commands
        assert isinstance(command, Shake)
        # handle patch centre (25.5, 25.5) rounds to pixel 26
        assert command.grasp_point == pytest.approx((-0.055, -0.055))

    def test_off_centre_bag_is_recentred(self) -> None:
        obs, masks = _make_scene(rows=slice(52, 62), cols=slice(55, 63))
        decision = decide(obs, masks, PolicyState(), FREE_PAIR)
        [command] = decision.commands
        assert isinstance(command, Recenter)
        assert command.target == (0.0, 0.0)

    def test_exhausted_budget_forces_lift(self) -> None:
        obs, masks = _make_scene(handles=2)
        ps = PolicyState(budget=0)
        decision = decide(obs, masks, ps, FREE_PAIR)
        assert decision.commands == ()
        assert decision.forced
        assert decision.next_phase is Phase.LIFT
        assert ps.forced
        assert ps.actions_used == 0

    def test_budget_is_never_exceeded(self) -> None:
        obs, masks = _make_scene()
        ps = PolicyState(budget=5)
        for _ in range(8):
            decision = decide(obs, masks, ps, FREE_PAIR)
            assert ps.actions_used <= ps.budget
        assert ps.actions_used == 5
        assert decision.forced

    def test_empty_scene(self) -> None:
        obs = make_observation(np.zeros((64, 64)))
        masks = Masks(np.zeros((64, 64), bool), np.zeros((64, 64), bool))
        decision = decide(obs, masks, PolicyState(), FREE_PAIR)
        assert decision.next_phase is Phase.LIFT
        assert decision.commands == ()


class TestOpenPhase:
    """Decisions while both handles are held."""

    def test_sufficient_opening_moves_to_hold(self) -> None:
        obs, masks = _make_scene(underside=0.1)
        ps = PolicyState(phase=Phase.OPEN, last_metrics=_make_metrics(0.5, 1.4))
        decision = decide(obs, masks, ps, HELD_PAIR)
        assert decision.commands == ()
        assert decision.next_phase is Phase.HOLD
        assert ps.opened
        assert not decision.forced

    def test_small_opening_gives_adjustment_and_shaking(self) -> None:
        obs, masks = _make_scene(underside=0.1)
        ps = PolicyState(phase=Phase.OPEN, last_metrics=_make_metrics(0.2, 3.0))
        decision = decide(obs, masks, ps, HELD_PAIR)
        adjustment, shaking = decision.commands
        assert isinstance(adjustment, BagAdjustment)
        assert adjustment.d == pytest.approx(0.3)
        assert isinstance(shaking, DualArmShaking)
        assert shaking.H == 1.4
        assert shaking.H_prime == pytest.approx(0.75)
        assert decision.next_phase is Phase.OPEN
        assert ps.actions_used == 2

    def test_ablation_skips_adjustment(self) -> None:
        obs, masks = _make_scene(underside=0.1)
        ps = PolicyState(phase=Phase.OPEN, last_metrics=_make_metrics(0.2, 1.5))
        variant = PolicyVariant(use_bag_adjustment=False)
        decision = decide(obs, masks, ps, HELD_PAIR, variant=variant)
        [command] = decision.commands
        assert isinstance(command, DualArmShaking)
        assert ps.actions_used == 1

    def test_commands_truncated_to_budget(self) -> None:
        obs, masks = _make_scene(underside=0.1)
        ps = PolicyState(
            budget=3,
            phase=Phase.OPEN,
            actions_used=2,
            last_metrics=_make_metrics(0.1, 4.0),
        )
        decision = decide(obs, masks, ps, HELD_PAIR)
        [command] = decision.commands
        assert isinstance(command, BagAdjustment)
        assert ps.exhausted

    def test_exhausted_budget_forces_hold(self) -> None:
        obs, masks = _make_scene(underside=0.1)
        ps = PolicyState(
            budget=4,
            phase=Phase.OPEN,
            actions_used=4,
            last_metrics=_make_metrics(0.1, 4.0),
        )
        decision = decide(obs, masks, ps, HELD_PAIR)
        assert decision.next_phase is Phase.HOLD
        assert decision.forced
        assert not ps.opened

    def test_other_phases_rejected(self) -> None:
        obs, masks = _make_scene()
        with pytest.raises(ValueError, match="hold"):
            decide(obs, masks, PolicyState(phase=Phase.HOLD), HELD_PAIR)


class TestHeights:
    """Tests for the shaking and holding heights."""

    def test_shaking_height_clears_the_bottom(self) -> None:
        sensed = BottomSensing(0.1, True)
        height = shaking_height(HELD_PAIR, sensed, PolicyConfig(), PrimitiveConfig())
        assert height == pytest.approx(0.75)

    def test_shaking_height_floor(self) -> None:
        sensed = BottomSensing(0.5, True)
        height = shaking_height(HELD_PAIR, sensed, PolicyConfig(), PrimitiveConfig())
        assert height == pytest.approx(0.7)

    def test_shaking_height_unsensed_assumes_table(self) -> None:
        missing = BottomSensing(0.0, False)
        height = shaking_height(HELD_PAIR, missing, PolicyConfig(), PrimitiveConfig())
        assert height == pytest.approx(0.85)

    def test_shaking_height_below_stroke_top(self) -> None:
        high = GripperPair(Pose(-0.15, 0.0, 1.5), Pose(0.15, 0.0, 1.5), True, True)
        height = shaking_height(
            high, BottomSensing(0.0, True), PolicyConfig(), PrimitiveConfig()
        )
        assert height < PrimitiveConfig().shaking_height

    def test_holding_height(self) -> None:
        height = holding_height(HELD_PAIR, BottomSensing(0.12, True), PolicyConfig())
        assert height == pytest.approx(0.68)

    def test_holding_height_fallback(self) -> None:
        config = PolicyConfig()
        height = holding_height(HELD_PAIR, BottomSensing(0.0, False), config)
        assert height == config.fallback_hold_height
