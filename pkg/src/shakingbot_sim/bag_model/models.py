"""
Data models for the particle bag: specification, topology, state and grippers.
"""

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum, IntEnum
from typing import Any, NamedTuple, Optional

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

TABLE_HEIGHT = 0.0
# Wrist pitch of a gripper pointing straight down; offsets are identity here
STRAIGHT_DOWN = -math.pi / 2
MIN_RESOLUTION = 8
STANDARD_WIDTH_RANGE = (0.25, 0.35)
STANDARD_HEIGHT_RANGE = (0.40, 0.53)


class InvalidBagSpecError(ValueError):
    """A BagSpec field violates its constraints."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"Invalid bag spec field '{field_name}': {message}")
        self.field = field_name


class AttachmentError(ValueError):
    """An attach/release request does not match the attachment registry."""


class GraspMissError(RuntimeError):
    """No particle lies within the grasp radius."""


class SimulationDivergedError(RuntimeError):
    """Non-finite values appeared in the particle state."""

    def __init__(self, step_count: int, detail: str = "non-finite position") -> None:
        super().__init__(f"Simulation diverged at step {step_count}: {detail}")
        self.step_count = step_count


class RimInvariantError(RuntimeError):
    """The rim cycle of a state is missing or corrupted."""


class ParticleLabel(IntEnum):
    """Semantic class of a particle."""

    BODY = 0
    RIM = 1
    HANDLE_L = 2
    HANDLE_R = 3

    @property
    def label_name(self) -> str:
        return LABEL_NAMES[self]

    @classmethod
    def from_name(cls, name: str) -> "ParticleLabel":
        for label, label_name in LABEL_NAMES.items():
            if label_name == name:
                return label
        raise ValueError(f"Unknown particle label: {name}")


LABEL_NAMES: dict[ParticleLabel, str] = {
    ParticleLabel.BODY: "body",
    ParticleLabel.RIM: "rim",
    ParticleLabel.HANDLE_L: "handle_L",
    ParticleLabel.HANDLE_R: "handle_R",
}


class PaintRegion(IntEnum):
    """Colour region of a particle in painted renders."""

    BASE = 0
    RIM_BAND = 1
    HANDLE = 2


class SpringKind(IntEnum):
    STRUCTURAL = 0
    SHEAR = 1
    BEND = 2
    SEAM = 3


class GripperId(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class ItemShape(str, Enum):
    SPHERE = "sphere"
    CYLINDER = "cylinder"


class Pose(NamedTuple):
    """Gripper pose: position in meters plus wrist pitch in radians."""

    x: float
    y: float
    z: float
    pitch: float = STRAIGHT_DOWN

    @property
    def position(self) -> FloatArray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def moved(
        self, dx: float = 0.0, dy: float = 0.0, dz: float = 0.0, dpitch: float = 0.0
    ) -> "Pose":
        return Pose(self.x + dx, self.y + dy, self.z + dz, self.pitch + dpitch)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self)


@dataclass(frozen=True)
class BagSpec:
    """Flat-bag dimensions and material constants (calibration defaults)."""

    width: float = 0.30
    height: float = 0.45
    handle_width: float = 0.06
    handle_height: float = 0.08
    resolution: int = 12
    mass_total: float = 0.02
    stiffness_structural: float = 40.0
    stiffness_shear: float = 10.0
    stiffness_bend: float = 2.0
    damping: float = 0.02
    drag_coeff: float = 1.0

    def validate(self) -> None:
        """Raise InvalidBagSpecError naming the first offending field."""
        if not isinstance(self.resolution, int) or isinstance(self.resolution, bool):
            raise InvalidBagSpecError("resolution", "must be an integer")
        if self.resolution < MIN_RESOLUTION:
            raise InvalidBagSpecError(
                "resolution", f"must be >= {MIN_RESOLUTION}, got {self.resolution}"
            )
        for name in (
            "width",
            "height",
            "handle_width",
            "handle_height",
            "mass_total",
            "stiffness_structural",
            "stiffness_shear",
            "stiffness_bend",
            "damping",
            "drag_coeff",
        ):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InvalidBagSpecError(name, f"must be > 0, got {value}")

    @property
    def is_standard_size(self) -> bool:
        """True when the flat size lies in the 25-35 cm by 40-53 cm range."""
        return (
            STANDARD_WIDTH_RANGE[0] <= self.width <= STANDARD_WIDTH_RANGE[1]
            and STANDARD_HEIGHT_RANGE[0] <= self.height <= STANDARD_HEIGHT_RANGE[1]
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BagSpec":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"Unknown key(s) in [bag]: {', '.join(unknown)}")
        spec = cls(**data)
        spec.validate()
        return spec


@dataclass(frozen=True)
class PhysicsParams:
    """
    Simulation constants that are not bag material properties.

    ``gravity`` and ``drag_coeff`` double as test hooks: ``drag_coeff`` overrides
    the bag's own coefficient when set and may be 0.
    """

    gravity: float = 9.81
    drag_coeff: Optional[float] = None
    particle_radius: float = 0.0015
    friction: float = 0.5
    penetration_tolerance: float = 0.001
    max_stretch_ratio: float = 3.0
    ke_eps: float = 1e-6

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class BagTopology:
    """Immutable connectivity and per-particle attributes shared by states."""

    spec: BagSpec
    seed: int
    nx: int
    ny: int
    tab_rows: int
    tab_cols: int
    labels: IntArray
    layers: IntArray
    paint: IntArray
    grid: IntArray
    spring_i: IntArray
    spring_j: IntArray
    spring_rest: FloatArray
    spring_kind: IntArray
    spring_k: FloatArray
    triangles: IntArray
    rim_cycle: IntArray
    rim_pairs: IntArray
    particle_mass: float
    max_incident_stiffness: float
    max_incident_springs: int
    rim_perimeter_rest: float
    rest_positions: FloatArray

    @property
    def n_particles(self) -> int:
        return int(self.labels.shape[0])

    def indices_with_label(self, label: ParticleLabel) -> IntArray:
        return np.flatnonzero(self.labels == int(label))


@dataclass(frozen=True, eq=False)
class GripperAttachment:
    """Particles rigidly pinned to one gripper, with offsets in the gripper frame."""

    gripper_id: GripperId
    pinned: tuple[int, ...]
    local_offsets: FloatArray

    def __post_init__(self) -> None:
        if not self.pinned:
            raise AttachmentError("An attachment must pin at least one particle")
        if self.local_offsets.shape != (len(self.pinned), 3):
            raise AttachmentError("local_offsets must have one row per pinned particle")


class SettleResult(NamedTuple):
    """Outcome of settle(): final state and which stop condition fired."""

    state: "BagState"
    converged: bool
    reason: str
    elapsed: float


@dataclass(eq=False)
class BagState:
    """Particle positions and velocities plus the live gripper registry."""

    topology: BagTopology
    positions: FloatArray
    velocities: FloatArray
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    time: float = 0.0
    step_count: int = 0
    attachments: dict[GripperId, GripperAttachment] = field(default_factory=dict)
    gripper_poses: dict[GripperId, Pose] = field(default_factory=dict)
    overstretch_warned: bool = False

    def __post_init__(self) -> None:
        n = self.topology.n_particles
        if self.positions.shape != (n, 3) or self.velocities.shape != (n, 3):
            raise ValueError(
                f"positions and velocities must have shape ({n}, 3), got "
                f"{self.positions.shape} and {self.velocities.shape}"
            )

    @property
    def spec(self) -> BagSpec:
        return self.topology.spec

    @property
    def n_particles(self) -> int:
        return self.topology.n_particles

    @property
    def labels(self) -> list[str]:
        return [LABEL_NAMES[ParticleLabel(v)] for v in self.topology.labels]

    @property
    def springs(self) -> list[tuple[int, int, float, SpringKind]]:
        topo = self.topology
        return [
            (int(i), int(j), float(rest), SpringKind(int(kind)))
            for i, j, rest, kind in zip(
                topo.spring_i, topo.spring_j, topo.spring_rest, topo.spring_kind
            )
        ]

    @property
    def rim_perimeter_rest(self) -> float:
        return self.topology.rim_perimeter_rest

    @property
    def drag_coeff(self) -> float:
        if self.physics.drag_coeff is not None:
            return self.physics.drag_coeff
        return self.topology.spec.drag_coeff

    def pinned_indices(self) -> set[int]:
        return {i for att in self.attachments.values() for i in att.pinned}

    def kinetic_energy(self) -> float:
        speed_sq = np.einsum("ij,ij->i", self.velocities, self.velocities)
        return float(0.5 * self.topology.particle_mass * speed_sq.sum())

    def copy(self) -> "BagState":
        return replace(
            self,
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            attachments=dict(self.attachments),
            gripper_poses=dict(self.gripper_poses),
        )

    def with_physics(self, **changes: Any) -> "BagState":
        """Copy of the state with some PhysicsParams fields replaced."""
        new_state = self.copy()
        new_state.physics = replace(self.physics, **changes)
        return new_state
