"""
Data models for the ShakingBot policy: phases, settings, decisions and the
outcome of a full bagging run.
"""

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, NamedTuple, Optional, Union

import numpy as np

from shakingbot_sim.bag_model.models import FloatArray, ItemShape
from shakingbot_sim.metrics.models import OpeningMetrics, OpeningThresholds
from shakingbot_sim.primitives.models import PrimitiveCommand

DEFAULT_BUDGET = 15
SEGMENTATION_METHODS = ("oracle", "analytic")


class InsertionInfeasibleError(ValueError):
    """The opening cannot be split into placement regions for the items."""


class RegraspError(RuntimeError):
    """The released handle could not be found and grasped again."""


class Phase(str, Enum):
    PERCEIVE = "perceive"
    GRASP = "grasp"
    OPEN = "open"
    HOLD = "hold"
    INSERT = "insert"
    REGRASP = "regrasp"
    LIFT = "lift"
    DONE = "done"
    FAILED = "failed"


# Every phase may also move to FAILED
TRANSITIONS: dict[Phase, frozenset[Phase]] = {
    Phase.PERCEIVE: frozenset({Phase.PERCEIVE, Phase.GRASP, Phase.LIFT}),
    Phase.GRASP: frozenset({Phase.OPEN, Phase.PERCEIVE, Phase.LIFT}),
    Phase.OPEN: frozenset({Phase.OPEN, Phase.HOLD, Phase.PERCEIVE}),
    Phase.HOLD: frozenset({Phase.INSERT}),
    Phase.INSERT: frozenset({Phase.REGRASP}),
    Phase.REGRASP: frozenset({Phase.LIFT}),
    Phase.LIFT: frozenset({Phase.DONE}),
    Phase.DONE: frozenset(),
    Phase.FAILED: frozenset(),
}


@dataclass(frozen=True)
class ItemSpec:
    """A rigid item waiting at a known pose on the table."""

    shape: ItemShape = ItemShape.SPHERE
    radius: float = 0.035
    height: float = 0.0
    start_pose: tuple[float, float, float] = (0.6, -0.4, 0.035)
    mass: float = 0.05

    def __post_init__(self) -> None:
        if not self.radius > 0 or not self.mass > 0:
            raise ValueError("Item radius and mass must be > 0")
        if self.shape is ItemShape.CYLINDER and not self.height > 0:
            raise ValueError("Cylinder items need a height > 0")

    @property
    def footprint_area(self) -> float:
        """Area of the disk the item must pass through, in m^2."""
        return math.pi * self.radius**2

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["shape"] = self.shape.value
        data["start_pose"] = list(self.start_pose)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ItemSpec":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"Unknown key(s) in [[items]]: {', '.join(unknown)}")
        values = dict(data)
        if "shape" in values:
            values["shape"] = ItemShape(values["shape"])
        if "start_pose" in values:
            values["start_pose"] = tuple(float(v) for v in values["start_pose"])
        return cls(**values)


def default_items() -> tuple[ItemSpec, ...]:
    """Two identical round items, as in the bagging trials."""
    return (
        ItemSpec(start_pose=(0.6, -0.4, 0.035)),
        ItemSpec(start_pose=(0.6, -0.3, 0.035)),
    )


@dataclass(frozen=True)
class PolicyConfig:
    """
    Thresholds and pre-set values of the policy. Lengths in m, times in s.

    ``grasp_separation`` is the pre-set gripper distance after the handles are
    lifted; ``fallback_hold_height`` is the conservative One-arm Holding
    height used when the bag bottom cannot be sensed.
    """

    r_center: float = 0.3
    grasp_radius: float = 0.03
    grasp_lift_height: float = 0.8
    grasp_separation: float = 0.30
    h_prime_clearance: float = 0.05
    min_h_prime: float = 0.7
    fallback_hold_height: float = 0.55
    drop_height: float = 0.15
    lift_height: float = 0.5
    lift_hold_time: float = 2.0
    regrasp_retries: int = 3
    shake_amplitude: float = 0.5
    shake_cycles: int = 2
    dropped_distance: float = 0.1
    settle_time: float = 1.0
    item_settle_time: float = 1.0
    bottom_window_px: int = 20
    contained_margin: float = 0.02
    thresholds: OpeningThresholds = field(default_factory=OpeningThresholds)

    def __post_init__(self) -> None:
        for name in (
            "r_center",
            "grasp_radius",
            "grasp_lift_height",
            "grasp_separation",
            "lift_height",
            "settle_time",
            "item_settle_time",
        ):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value}")
        if self.regrasp_retries < 1:
            raise ValueError("regrasp_retries must be >= 1")
        if self.bottom_window_px < 1:
            raise ValueError("bottom_window_px must be >= 1")
        if self.lift_hold_time < 0 or self.drop_height < 0:
            raise ValueError("lift_hold_time and drop_height must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PolicyVariant:
    """Switches that turn the full policy into its ablations or the baseline."""

    use_bag_adjustment: bool = True
    use_one_arm_holding: bool = True
    segmentation: str = "oracle"

    def __post_init__(self) -> None:
        if self.segmentation not in SEGMENTATION_METHODS:
            raise ValueError(
                f"segmentation must be one of {SEGMENTATION_METHODS}, "
                f"got {self.segmentation!r}"
            )


@dataclass(frozen=True)
class DualGrasp:
    """Grasp both handles at the given world points, left at the smaller x."""

    left_point: tuple[float, float, float]
    right_point: tuple[float, float, float]


PolicyCommand = Union[PrimitiveCommand, DualGrasp]


def command_name(command: PolicyCommand) -> str:
    return type(command).__name__


@dataclass
class PolicyState:
    """Phase, budget bookkeeping and the latest opening measurement."""

    budget: int = DEFAULT_BUDGET
    phase: Phase = Phase.PERCEIVE
    actions_used: int = 0
    last_metrics: Optional[OpeningMetrics] = None
    metrics_trace: list[dict[str, Any]] = field(default_factory=list)
    forced: bool = False
    opened: bool = False

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise ValueError(f"Action budget must be >= 0, got {self.budget}")

    @property
    def remaining(self) -> int:
        return self.budget - self.actions_used

    @property
    def exhausted(self) -> bool:
        return self.actions_used >= self.budget

    def move_to(self, phase: Phase) -> None:
        """
        Change phase along the allowed transitions.

        Raises:
            ValueError: If the transition is not allowed
        """
        if phase is not Phase.FAILED and phase not in TRANSITIONS[self.phase]:
            raise ValueError(
                f"Phase transition {self.phase.value} -> {phase.value} is not allowed"
            )
        self.phase = phase

    def use_actions(self, count: int) -> None:
        if self.actions_used + count > self.budget:
            raise ValueError(
                f"{count} more action(s) would exceed the budget of {self.budget}"
            )
        self.actions_used += count

    def record_metrics(self, metrics: OpeningMetrics, t: float) -> None:
        self.last_metrics = metrics
        self.metrics_trace.append({"t": t, **metrics.to_dict()})


@dataclass(frozen=True)
class Decision:
    """Commands to execute next and the phase to move to afterwards."""

    commands: tuple[PolicyCommand, ...]
    next_phase: Phase
    reason: str
    grasp_point: Optional[tuple[float, float, float]] = None
    forced: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "commands": [command_name(c) for c in self.commands],
            "next_phase": self.next_phase.value,
            "reason": self.reason,
            "forced": self.forced,
        }


class BottomSensing(NamedTuple):
    """Lowest bag height under the grippers, or the fallback when not sensed."""

    height: float
    sensed: bool


@dataclass
class PolicyOutcome:
    """Result of one end-to-end run of the policy."""

    open_bag: bool
    placed: int
    contained: int
    partial: bool
    full: bool
    actions: int
    sim_time: float
    forced_lift: bool = False
    failure_reason: Optional[str] = None
    metrics_trace: list[dict[str, Any]] = field(default_factory=list)
    item_positions: Optional[FloatArray] = None

    def to_dict(self) -> dict[str, Any]:
        data = {
            "open_bag": self.open_bag,
            "placed": self.placed,
            "contained": self.contained,
            "partial": self.partial,
            "full": self.full,
            "actions": self.actions,
            "sim_time": self.sim_time,
            "forced_lift": self.forced_lift,
            "failure_reason": self.failure_reason,
            "metrics_trace": list(self.metrics_trace),
        }
        if self.item_positions is not None:
            data["item_positions"] = np.asarray(self.item_positions).tolist()
        return data
