"""
Replaying gripper trajectories through the bag simulation.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import structlog

from shakingbot_sim.bag_model.items import ItemBody
from shakingbot_sim.bag_model.models import (
    BagState,
    GripperAttachment,
    GripperId,
    Pose,
    SettleResult,
)
from shakingbot_sim.bag_model.physics import (
    attach,
    pinned_targets,
    release,
    settle,
    step,
)
from shakingbot_sim.primitives.models import (
    DualTrajectory,
    EventKind,
    GripperPair,
    PrimitiveConfig,
    TrajectoryEvent,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

# Where an idle gripper waits when the state has never seen it
PARKED_POSES = {
    GripperId.LEFT: Pose(-0.5, 0.0, 0.5),
    GripperId.RIGHT: Pose(0.5, 0.0, 0.5),
}
DEFAULT_GRASP_RADIUS = 0.03


@dataclass(eq=False)
class Scene:
    """The bag, the items dropped into it and the running event log."""

    state: BagState
    items: list[ItemBody] = field(default_factory=list)
    primitive_config: PrimitiveConfig = field(default_factory=PrimitiveConfig)
    grasp_radius: float = DEFAULT_GRASP_RADIUS
    events: list[dict[str, Any]] = field(default_factory=list)

    @property
    def time(self) -> float:
        return self.state.time

    def gripper_pose(self, gripper_id: GripperId) -> Pose:
        return self.state.gripper_poses.get(gripper_id, PARKED_POSES[gripper_id])

    @property
    def pair(self) -> GripperPair:
        """Current gripper poses with the attachment flags of the state."""
        return GripperPair(
            left=self.gripper_pose(GripperId.LEFT),
            right=self.gripper_pose(GripperId.RIGHT),
            left_attached=GripperId.LEFT in self.state.attachments,
            right_attached=GripperId.RIGHT in self.state.attachments,
        )

    def log(self, kind: str, **fields: Any) -> None:
        self.events.append({"t": round(self.time, 6), "event": kind, **fields})

    def grasp(
        self, gripper_id: GripperId, point: tuple[float, float, float]
    ) -> GripperAttachment:
        """
        Attach a gripper at a world point.

        Raises:
            GraspMissError: If no bag particle lies within the grasp radius
        """
        attachment = attach(
            self.state, gripper_id, np.asarray(point), self.grasp_radius
        )
        self.log(
            "attach",
            gripper=gripper_id.value,
            point=[round(float(c), 4) for c in point],
            pinned=len(attachment.pinned),
        )
        return attachment

    def let_go(self, gripper_id: GripperId) -> None:
        attachment = self.state.attachments.get(gripper_id)
        if attachment is None:
            return
        release(self.state, attachment)
        self.log("release", gripper=gripper_id.value)

    def release_all(self) -> None:
        for gripper_id in list(self.state.attachments):
            self.let_go(gripper_id)

    def advance(self, poses: dict[GripperId, Pose], dt: float) -> None:
        attachments = list(self.state.attachments.values())
        self.state = step(self.state, attachments, poses, dt, self.items)

    def settle(self, max_time: float) -> SettleResult:
        """Let the bag and any items come to rest with the grippers held still."""
        if not self.items:
            result = settle(self.state, max_time=max_time, dt=self.primitive_config.dt)
            self.state = result.state
            return result
        # Items keep moving after the bag is quiet, so run the full time
        dt = self.primitive_config.dt
        elapsed = 0.0
        while elapsed < max_time - 1e-12:
            self.advance({}, dt)
            elapsed += dt
        return SettleResult(self.state, False, "timeout", elapsed)


def _apply_event(scene: Scene, event: TrajectoryEvent) -> None:
    if event.kind is EventKind.RELEASE:
        scene.let_go(event.gripper_id)
    else:
        pose = scene.gripper_pose(event.gripper_id)
        scene.grasp(event.gripper_id, (pose.x, pose.y, pose.z))


def execute_trajectory(scene: Scene, trajectory: DualTrajectory) -> None:
    """
    Drive the grippers along a trajectory, stepping the simulation once per
    sample interval.

    Events fire at their time stamp, before the interval that starts there.
    """
    pending = sorted(trajectory.events, key=lambda e: e.t)
    times = trajectory.times
    for k in range(1, trajectory.n_samples):
        while pending and pending[0].t <= times[k - 1] + 1e-12:
            _apply_event(scene, pending.pop(0))
        scene.advance(trajectory.poses(k), float(times[k] - times[k - 1]))
    for event in pending:
        _apply_event(scene, event)
    if trajectory.n_samples == 1:
        scene.state.gripper_poses.update(trajectory.poses(0))


def dropped_attachments(
    state: BagState, distance: float, poses: Optional[dict[GripperId, Pose]] = None
) -> list[GripperId]:
    """Grippers whose pinned particles have all drifted beyond ``distance``."""
    poses = poses or state.gripper_poses
    dropped = []
    for gripper_id, attachment in state.attachments.items():
        pose = poses.get(gripper_id)
        if pose is None:
            continue
        index = np.asarray(attachment.pinned, dtype=np.int64)
        gap = np.linalg.norm(
            state.positions[index] - pinned_targets(attachment, pose), axis=1
        )
        if bool(np.all(gap > distance)):
            dropped.append(gripper_id)
    return dropped
