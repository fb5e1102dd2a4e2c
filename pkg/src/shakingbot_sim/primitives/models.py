"""
Data models for action primitives: commands, gripper pairs and trajectories.
"""

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, NamedTuple, Union

import numpy as np
from numpy.typing import NDArray

from shakingbot_sim.bag_model.models import TABLE_HEIGHT, GripperId, Pose

FloatArray = NDArray[np.float64]

# Column order of a pose row in a trajectory
POSE_COLUMNS = ("x", "y", "z", "pitch")


class PrimitiveError(ValueError):
    """A primitive command was rejected."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise PrimitiveError(message)


@dataclass(frozen=True)
class BagAdjustment:
    """Close the gripper gap by delta_d, then swing the bag sideways k_s times."""

    d: float
    delta_d: float
    k_s: int
    l: float
    f: float
    d_min: float

    def __post_init__(self) -> None:
        _require(self.d > 0, f"BagAdjustment d must be > 0, got {self.d}")
        _require(self.delta_d >= 0, f"delta_d must be >= 0, got {self.delta_d}")
        _require(self.k_s >= 1, f"k_s must be >= 1, got {self.k_s}")
        _require(self.l >= 0, f"swing half-length l must be >= 0, got {self.l}")
        _require(self.f > 0, f"swing frequency f must be > 0, got {self.f}")
        _require(self.d_min >= 0, f"d_min must be >= 0, got {self.d_min}")


@dataclass(frozen=True)
class DualArmShaking:
    """Fling both handles up to H, then pull down to H_prime, at speed v."""

    H: float
    H_prime: float
    v: float

    def __post_init__(self) -> None:
        _require(
            self.H > self.H_prime > 0,
            f"Need H > H_prime > 0, got H={self.H}, H_prime={self.H_prime}",
        )
        _require(self.v > 0, f"Shaking speed v must be > 0, got {self.v}")


@dataclass(frozen=True)
class OneArmHolding:
    """Lower the bag to height h, then let go with the right gripper."""

    h: float

    def __post_init__(self) -> None:
        _require(
            self.h >= TABLE_HEIGHT,
            f"Holding height {self.h} is below the table at {TABLE_HEIGHT}",
        )


@dataclass(frozen=True)
class Shake:
    """Lift the bag by one grasp point and rock the wrist."""

    grasp_point: tuple[float, float]
    amplitude: float
    cycles: int

    def __post_init__(self) -> None:
        _require(self.amplitude >= 0, f"amplitude must be >= 0, got {self.amplitude}")
        _require(self.cycles >= 1, f"cycles must be >= 1, got {self.cycles}")


@dataclass(frozen=True)
class Recenter:
    """Drag the bag so its centroid lands on target (m, table frame)."""

    target: tuple[float, float]


PrimitiveCommand = Union[BagAdjustment, DualArmShaking, OneArmHolding, Shake, Recenter]


class EventKind(str, Enum):
    ATTACH = "attach"
    RELEASE = "release"


class TrajectoryEvent(NamedTuple):
    t: float
    kind: EventKind
    gripper_id: GripperId


@dataclass(frozen=True)
class GripperPair:
    """Poses of both grippers and which of them currently hold the bag."""

    left: Pose
    right: Pose
    left_attached: bool = False
    right_attached: bool = False

    @property
    def both_attached(self) -> bool:
        return self.left_attached and self.right_attached

    @property
    def separation(self) -> float:
        return math.dist(self.left.position, self.right.position)

    @property
    def midpoint(self) -> FloatArray:
        return (self.left.position + self.right.position) / 2.0

    def is_symmetric(self, tol: float = 0.01) -> bool:
        """Mirror images about the plane halfway between them along x."""
        return (
            abs(self.left.y - self.right.y) <= tol
            and abs(self.left.z - self.right.z) <= tol
            and self.left.x <= self.right.x
        )

    def pose(self, gripper_id: GripperId) -> Pose:
        return self.left if gripper_id is GripperId.LEFT else self.right

    def attached(self, gripper_id: GripperId) -> bool:
        if gripper_id is GripperId.LEFT:
            return self.left_attached
        return self.right_attached


@dataclass(frozen=True, eq=False)
class DualTrajectory:
    """
    Time-sampled poses of both grippers plus attach/release events.

    ``left`` and ``right`` are (K, 4) arrays of x, y, z, pitch rows.
    """

    times: FloatArray
    left: FloatArray
    right: FloatArray
    events: tuple[TrajectoryEvent, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        k = self.times.shape[0]
        _require(k >= 1, "A trajectory needs at least one sample")
        _require(
            self.left.shape == (k, 4) and self.right.shape == (k, 4),
            f"Pose arrays must have shape ({k}, 4)",
        )
        _require(
            bool(np.all(np.diff(self.times) > 0)),
            "Trajectory sample times must be strictly increasing",
        )
        _require(
            bool(np.isfinite(self.left).all() and np.isfinite(self.right).all()),
            "Trajectory poses must be finite",
        )

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    @property
    def n_samples(self) -> int:
        return int(self.times.shape[0])

    @property
    def max_speed(self) -> float:
        """Largest sample-to-sample gripper speed in m/s."""
        if self.n_samples < 2:
            return 0.0
        dt = np.diff(self.times)
        speeds = [
            np.linalg.norm(np.diff(poses[:, :3], axis=0), axis=1) / dt
            for poses in (self.left, self.right)
        ]
        return float(max(s.max() for s in speeds))

    def poses(self, k: int) -> dict[GripperId, Pose]:
        return {
            GripperId.LEFT: Pose(*(float(v) for v in self.left[k])),
            GripperId.RIGHT: Pose(*(float(v) for v in self.right[k])),
        }

    def final_pair(self, start: GripperPair) -> GripperPair:
        """Gripper pair after the trajectory, with attachment flags updated."""
        attached = {
            GripperId.LEFT: start.left_attached,
            GripperId.RIGHT: start.right_attached,
        }
        for event in self.events:
            attached[event.gripper_id] = event.kind is EventKind.ATTACH
        last = self.poses(self.n_samples - 1)
        return GripperPair(
            last[GripperId.LEFT],
            last[GripperId.RIGHT],
            attached[GripperId.LEFT],
            attached[GripperId.RIGHT],
        )


@dataclass(frozen=True)
class PrimitiveConfig:
    """
    Motion limits, rates and the pre-set primitive parameters.

    Lengths in m, speeds in m/s, angles in rad. Swing and distance parameters are
    site calibration values.
    """

    dt: float = 1.0 / 240.0
    v_max: float = 2.0
    reach: float = 1.6
    workspace_half_extents: tuple[float, float] = (0.9, 0.6)
    move_speed: float = 0.3
    adjust_speed: float = 0.1
    hold_speed: float = 0.2
    park_distance: float = 0.35
    shake_height: float = 0.4
    shake_period: float = 0.5
    recenter_lift: float = 0.05
    recenter_tolerance: float = 0.02
    swing_count: int = 3
    swing_half_length: float = 0.08
    swing_frequency: float = 2.0
    distance_step: float = 0.05
    min_distance: float = 0.08
    shaking_height: float = 1.4
    shaking_speed: float = 1.5

    def __post_init__(self) -> None:
        _require(0 < self.dt <= 1.0 / 60.0, f"dt must lie in (0, 1/60], got {self.dt}")
        for name in (
            "v_max",
            "reach",
            "move_speed",
            "adjust_speed",
            "hold_speed",
            "shake_period",
            "shaking_speed",
        ):
            value = getattr(self, name)
            _require(value > 0, f"{name} must be > 0, got {value}")
        _require(
            self.shaking_speed <= self.v_max,
            f"shaking_speed {self.shaking_speed} exceeds v_max {self.v_max}",
        )
        _require(
            self.park_distance >= 0.3,
            f"park_distance must be >= 0.3 m, got {self.park_distance}",
        )

    def bag_adjustment(self, d: float) -> BagAdjustment:
        """BagAdjustment for the current gripper gap with the pre-set parameters."""
        return BagAdjustment(
            d=d,
            delta_d=self.distance_step,
            k_s=self.swing_count,
            l=self.swing_half_length,
            f=self.swing_frequency,
            d_min=self.min_distance,
        )

    def dual_arm_shaking(self, h_prime: float) -> DualArmShaking:
        return DualArmShaking(
            H=self.shaking_height, H_prime=h_prime, v=self.shaking_speed
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
