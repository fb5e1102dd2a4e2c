"""Test bag dynamics, grippers and settling."""

import numpy as np
import pytest

from shakingbot_sim.bag_model import (
    DEFAULT_DT,
    AttachmentError,
    BagState,
    GraspMissError,
    GripperId,
    ParticleLabel,
    Pose,
    SimulationDivergedError,
    advance,
    attach,
    release,
    settle,
    step,
)
from tests.conftest import make_bag


def _handle_point(state: BagState, label: ParticleLabel) -> np.ndarray:
    index = state.topology.indices_with_label(label)
    return state.positions[index[0]].copy()


def _lifted(state: BagState, height: float) -> BagState:
    lifted = state.copy()
    lifted.positions[:, 2] += height
    return lifted


class TestStep:
    """Tests for single integration steps."""

    def test_weightless_bag_stays_put(self, weightless_bag: BagState) -> None:
        after = step(weightless_bag, [], {}, DEFAULT_DT)
        np.testing.assert_allclose(
            after.positions, weightless_bag.positions, rtol=0, atol=1e-9
        )
        assert after.step_count == 1
        assert after.time == pytest.approx(DEFAULT_DT)

    def test_input_state_is_not_modified(self, flat_bag: BagState) -> None:
        before = flat_bag.positions.copy()
        step(_lifted(flat_bag, 0.5), [], {}, DEFAULT_DT)
        np.testing.assert_array_equal(flat_bag.positions, before)

    def test_free_fall_without_drag(self) -> None:
        state = _lifted(make_bag(drag_coeff=0.0), 1.0)
        start = state.positions[:, 2].mean()
        for _ in range(48):
            state = advance(state)
        drop = start - state.positions[:, 2].mean()
        expected = 0.5 * 9.81 * state.time**2
        assert drop == pytest.approx(expected, rel=0.01)

    def test_drag_slows_the_fall(self) -> None:
        plain = _lifted(make_bag(drag_coeff=0.0), 1.0)
        dragged = _lifted(make_bag(), 1.0)
        for _ in range(48):
            plain = advance(plain)
            dragged = advance(dragged)
        assert dragged.positions[:, 2].mean() > plain.positions[:, 2].mean()

    @pytest.mark.parametrize("dt", [0.0, -0.01, 0.1])
    def test_dt_out_of_range(self, flat_bag: BagState, dt: float) -> None:
        with pytest.raises(ValueError, match="dt"):
            step(flat_bag, [], {}, dt)

    def test_non_finite_pose_rejected(self, flat_bag: BagState) -> None:
        with pytest.raises(ValueError, match="not finite"):
            step(flat_bag, [], {GripperId.LEFT: Pose(0.0, float("nan"), 0.1)}, 0.01)

    def test_nan_position_reports_divergence(self, flat_bag: BagState) -> None:
        broken = flat_bag.copy()
        broken.positions[0, 0] = np.nan
        with pytest.raises(SimulationDivergedError) as exc_info:
            step(broken, [], {}, DEFAULT_DT)
        assert exc_info.value.step_count == 1

    def test_particles_stay_above_table(self, flat_bag: BagState) -> None:
        state = flat_bag
        for _ in range(20):
            state = advance(state)
        floor = state.physics.particle_radius
        assert state.positions[:, 2].min() >= floor - 1e-12

    def test_gripper_pushing_into_table_diverges(self, flat_bag: BagState) -> None:
        state = flat_bag.copy()
        point = _handle_point(state, ParticleLabel.HANDLE_L)
        attachment = attach(state, GripperId.LEFT, point, 0.01)
        pose = state.gripper_poses[GripperId.LEFT].moved(dz=-0.05)
        with pytest.raises(SimulationDivergedError, match="below the table"):
            step(state, [attachment], {GripperId.LEFT: pose}, DEFAULT_DT)


class TestGrippers:
    """Tests for attach, release and pinned motion."""

    def test_pinned_particles_follow_gripper(self, flat_bag: BagState) -> None:
        state = flat_bag.copy()
        point = _handle_point(state, ParticleLabel.HANDLE_L)
        attachment = attach(state, GripperId.LEFT, point, 0.01)
        pinned = list(attachment.pinned)
        before = state.positions[pinned].copy()

        pose = state.gripper_poses[GripperId.LEFT].moved(dz=0.1)
        after = step(state, [attachment], {GripperId.LEFT: pose}, 0.01)

        np.testing.assert_allclose(
            after.positions[pinned] - before,
            np.tile([0.0, 0.0, 0.1], (len(pinned), 1)),
            atol=1e-12,
        )
        assert after.gripper_poses[GripperId.LEFT] == pose

    def test_attach_registers_pose_at_grasp_point(self, flat_bag: BagState) -> None:
        state = flat_bag.copy()
        point = _handle_point(state, ParticleLabel.HANDLE_R)
        attachment = attach(state, GripperId.RIGHT, point, 0.01)
        assert state.attachments[GripperId.RIGHT] is attachment
        assert state.gripper_poses[GripperId.RIGHT].x == pytest.approx(point[0])

    def test_attach_miss(self, flat_bag: BagState) -> None:
        state = flat_bag.copy()
        with pytest.raises(GraspMissError):
            attach(state, GripperId.LEFT, np.array([2.0, 2.0, 0.0]), 0.01)

    def test_attach_zero_radius(self, flat_bag: BagState) -> None:
        state = flat_bag.copy()
        with pytest.raises(AttachmentError):
            attach(state, GripperId.LEFT, state.positions[0], 0.0)

    def test_attach_twice_rejected(self, flat_bag: BagState) -> None:
        state = flat_bag.copy()
        point = _handle_point(state, ParticleLabel.HANDLE_L)
        attach(state, GripperId.LEFT, point, 0.01)
        with pytest.raises(AttachmentError):
            attach(state, GripperId.LEFT, point, 0.01)

    def test_grippers_do_not_share_particles(self, flat_bag: BagState) -> None:
        state = flat_bag.copy()
        point = _handle_point(state, ParticleLabel.HANDLE_L)
        left = attach(state, GripperId.LEFT, point, 0.05)
        right = attach(state, GripperId.RIGHT, point, 0.08)
        assert not set(left.pinned) & set(right.pinned)

    def test_release_twice_rejected(self, flat_bag: BagState) -> None:
        state = flat_bag.copy()
        attachment = attach(
            state, GripperId.LEFT, _handle_point(state, ParticleLabel.HANDLE_L), 0.01
        )
        release(state, attachment)
        assert GripperId.LEFT not in state.attachments
        with pytest.raises(AttachmentError):
            release(state, attachment)

    def test_missing_pose_for_attachment(self, flat_bag: BagState) -> None:
        state = flat_bag.copy()
        attachment = attach(
            state, GripperId.LEFT, _handle_point(state, ParticleLabel.HANDLE_L), 0.01
        )
        del state.gripper_poses[GripperId.LEFT]
        with pytest.raises(AttachmentError):
            step(state, [attachment], {}, DEFAULT_DT)


class TestSettle:
    """Tests for settle."""

    def test_resting_bag_converges_immediately(self, weightless_bag: BagState) -> None:
        result = settle(weightless_bag)
        assert result.converged
        assert result.reason == "kinetic_energy_below_eps"
        assert result.elapsed == 0.0
        assert result.state is weightless_bag

    def test_timeout(self, flat_bag: BagState) -> None:
        result = settle(
            _lifted(flat_bag, 0.2), max_time=2 * DEFAULT_DT, ke_eps=0.0
        )
        assert not result.converged
        assert result.reason == "timeout"
        assert result.state.step_count == 2

    def test_max_time_must_be_positive(self, flat_bag: BagState) -> None:
        with pytest.raises(ValueError):
            settle(flat_bag, max_time=0.0)
