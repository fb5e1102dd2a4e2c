"""
Incremental construction of dual-gripper trajectories on a fixed time grid.
"""

import math
from typing import Any, Callable, Optional

import numpy as np

from shakingbot_sim.bag_model.models import GripperId, Pose
from shakingbot_sim.primitives.models import (
    DualTrajectory,
    EventKind,
    FloatArray,
    GripperPair,
    PrimitiveConfig,
    PrimitiveError,
    TrajectoryEvent,
)

# Remainders shorter than this merge into the previous grid interval
GRID_MERGE = 1e-6

# Maps local phase time (s) to the (left, right) pose rows at that time
Profile = Callable[[float], tuple[FloatArray, FloatArray]]


def time_grid(duration: float, dt: float) -> FloatArray:
    """
    Sample times 0, dt, 2dt, ... ending exactly at ``duration``.

    The final interval is shorter than dt when duration is not a multiple of dt.
    """
    if duration < 0:
        raise PrimitiveError(f"Phase duration must be >= 0, got {duration}")
    if duration < GRID_MERGE:
        return np.array([0.0])
    n = int(math.floor(duration / dt + 1e-9))
    times = np.arange(n + 1, dtype=np.float64) * dt
    if duration - times[-1] > GRID_MERGE:
        times = np.append(times, duration)
    else:
        times[-1] = duration
    return times


def pose_row(pose: Pose) -> FloatArray:
    return np.array(pose, dtype=np.float64)


class TrajectoryBuilder:
    """
    Appends motion phases to a trajectory starting from a gripper pair.

    Every phase begins at the last sample of the previous one; the shared
    sample is not repeated.
    """

    def __init__(self, start: GripperPair, config: PrimitiveConfig) -> None:
        self.config = config
        self.start = start
        self._times: list[float] = [0.0]
        self._left: list[FloatArray] = [pose_row(start.left)]
        self._right: list[FloatArray] = [pose_row(start.right)]
        self._events: list[TrajectoryEvent] = []

    @property
    def now(self) -> float:
        return self._times[-1]

    @property
    def left(self) -> FloatArray:
        return self._left[-1].copy()

    @property
    def right(self) -> FloatArray:
        return self._right[-1].copy()

    def profile(self, duration: float, shape: Profile) -> "TrajectoryBuilder":
        """Sample ``shape`` over a phase of the given duration."""
        t0 = self.now
        for tau in time_grid(duration, self.config.dt)[1:]:
            left, right = shape(float(tau))
            self._times.append(t0 + float(tau))
            self._left.append(np.asarray(left, dtype=np.float64))
            self._right.append(np.asarray(right, dtype=np.float64))
        return self

    def move_to(
        self,
        left: Optional[FloatArray] = None,
        right: Optional[FloatArray] = None,
        speed: Optional[float] = None,
    ) -> "TrajectoryBuilder":
        """
        Straight-line move of both grippers, finishing together.

        The gripper with the longer path travels at ``speed``; pitch is
        interpolated alongside.
        """
        speed = speed or self.config.move_speed
        start_left, start_right = self.left, self.right
        end_left = start_left if left is None else np.asarray(left, dtype=np.float64)
        end_right = (
            start_right if right is None else np.asarray(right, dtype=np.float64)
        )
        distance = max(
            float(np.linalg.norm(end_left[:3] - start_left[:3])),
            float(np.linalg.norm(end_right[:3] - start_right[:3])),
        )
        if distance < GRID_MERGE:
            return self
        duration = distance / speed

        def shape(tau: float) -> tuple[FloatArray, FloatArray]:
            frac = tau / duration
            return (
                start_left + (end_left - start_left) * frac,
                start_right + (end_right - start_right) * frac,
            )

        return self.profile(duration, shape)

    def hold(self, duration: float) -> "TrajectoryBuilder":
        left, right = self.left, self.right
        return self.profile(duration, lambda _tau: (left, right))

    def event(self, kind: EventKind, gripper_id: GripperId) -> "TrajectoryBuilder":
        self._events.append(TrajectoryEvent(self.now, kind, gripper_id))
        return self

    def build(self, **metadata: Any) -> DualTrajectory:
        """
        Freeze the trajectory.

        Raises:
            PrimitiveError: If any sample-to-sample speed exceeds v_max
        """
        trajectory = DualTrajectory(
            times=np.array(self._times),
            left=np.array(self._left),
            right=np.array(self._right),
            events=tuple(self._events),
            metadata=dict(metadata),
        )
        limit = self.config.v_max * (1.0 + 1e-9)
        if trajectory.max_speed > limit:
            raise PrimitiveError(
                f"Trajectory speed {trajectory.max_speed:.3f} m/s exceeds the "
                f"limit of {self.config.v_max:.3f} m/s"
            )
        return trajectory
