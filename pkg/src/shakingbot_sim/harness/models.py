"""
Data models for the evaluation harness: trial settings, trial records and the
aggregated result rows.
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Optional

from shakingbot_sim.bag_model.models import BagSpec, PhysicsParams
from shakingbot_sim.metrics.models import OpeningThresholds
from shakingbot_sim.perception.models import PerceptionConfig
from shakingbot_sim.policy.models import (
    DEFAULT_BUDGET,
    ItemSpec,
    PolicyConfig,
    PolicyVariant,
    default_items,
)
from shakingbot_sim.primitives.models import PrimitiveConfig

TIERS = (1, 2, 3)
MAX_TIER_RETRIES = 20
# Tier 1 and tier 2 are told apart by the rim's normalised hull area
TIER_AREA_SPLIT = 0.30


class TierGenerationError(RuntimeError):
    """No seeded attempt produced a bag that meets the tier's predicate."""

    def __init__(self, tier: int, seed: int, attempts: int) -> None:
        self.tier = tier
        self.seed = seed
        self.attempts = attempts
        super().__init__(
            f"Could not generate a tier {tier} bag for seed {seed} "
            f"in {attempts} attempts"
        )


class Method(str, Enum):
    SHAKINGBOT = "shakingbot"
    SHAKINGBOT_A = "shakingbot_A"
    SHAKINGBOT_H = "shakingbot_H"
    ANALYTIC_PRIMITIVES = "analytic_primitives"

    @property
    def label(self) -> str:
        """Method name as printed in result tables."""
        return _METHOD_LABELS[self]

    @property
    def variant(self) -> PolicyVariant:
        """Policy switches that realise this method."""
        if self is Method.SHAKINGBOT_A:
            return PolicyVariant(use_bag_adjustment=False)
        if self is Method.SHAKINGBOT_H:
            return PolicyVariant(use_one_arm_holding=False)
        if self is Method.ANALYTIC_PRIMITIVES:
            return PolicyVariant(segmentation="analytic")
        return PolicyVariant()


_METHOD_LABELS = {
    Method.SHAKINGBOT: "ShakingBot",
    Method.SHAKINGBOT_A: "ShakingBot-A",
    Method.SHAKINGBOT_H: "ShakingBot-H",
    Method.ANALYTIC_PRIMITIVES: "Analytic&Primitives",
}


@dataclass(frozen=True)
class TrialConfig:
    """
    Everything needed to reproduce one trial.

    ``budget`` may be 0, which makes the policy lift the bag straight away.
    ``pattern`` and ``body_color`` only change the RGB render.
    """

    method: Method = Method.SHAKINGBOT
    tier: int = 1
    seed: int = 0
    bag: BagSpec = field(default_factory=BagSpec)
    items: tuple[ItemSpec, ...] = field(default_factory=default_items)
    thresholds: OpeningThresholds = field(default_factory=OpeningThresholds)
    budget: int = DEFAULT_BUDGET
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    primitives: PrimitiveConfig = field(default_factory=PrimitiveConfig)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    pattern: Optional[str] = None
    body_color: Optional[tuple[int, int, int]] = None

    def __post_init__(self) -> None:
        if self.tier not in TIERS:
            raise ValueError(f"tier must be one of {TIERS}, got {self.tier}")
        if self.budget < 0:
            raise ValueError(f"Action budget must be >= 0, got {self.budget}")
        if not self.items:
            raise ValueError("A trial needs at least one item")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        self.bag.validate()

    @property
    def cell(self) -> tuple[int, Method]:
        return (self.tier, self.method)

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method.value,
            "tier": self.tier,
            "seed": self.seed,
            "bag": self.bag.to_dict(),
            "items": [item.to_dict() for item in self.items],
            "thresholds": asdict(self.thresholds),
            "budget": self.budget,
            "physics": self.physics.to_dict(),
            "primitives": asdict(self.primitives),
            "perception": self.perception.to_dict(),
            "policy": self.policy.to_dict(),
            "pattern": self.pattern,
            "body_color": None if self.body_color is None else list(self.body_color),
        }


@dataclass
class TrialRecord:
    """Judged result of one trial."""

    method: Method
    tier: int
    seed: int
    open_bag: bool
    placed: int
    partial: bool
    full: bool
    actions: int
    sim_time: float
    budget: int = DEFAULT_BUDGET
    contained: int = 0
    forced_lift: bool = False
    failure_reason: Optional[str] = None
    metrics_trace: list[dict[str, Any]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.full and not self.partial:
            raise ValueError("A full success must also be a partial success")
        if self.placed < 0 or self.contained < 0:
            raise ValueError("placed and contained must be >= 0")
        if not 0 <= self.actions <= self.budget:
            raise ValueError(
                f"actions must lie in [0, {self.budget}], got {self.actions}"
            )

    @property
    def failed(self) -> bool:
        return self.failure_reason is not None

    @property
    def sort_key(self) -> tuple[int, str, int]:
        return (self.tier, self.method.value, self.seed)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["method"] = self.method.value
        return data

    @classmethod
    def failure(cls, config: TrialConfig, reason: str) -> "TrialRecord":
        """Record of a trial that could not run to its end."""
        return cls(
            method=config.method,
            tier=config.tier,
            seed=config.seed,
            open_bag=False,
            placed=0,
            partial=False,
            full=False,
            actions=0,
            sim_time=0.0,
            budget=config.budget,
            failure_reason=reason,
        )


@dataclass(frozen=True)
class ResultRow:
    """Aggregate of all trials in one (tier, method) cell."""

    tier: int
    method: Method
    trials: int
    open_bag: int
    placed_mean: float
    placed_std: float
    partial: int
    full: int
    actions_mean: float
    actions_std: float
    time_mean: float
    time_std: float
    failed: int = 0

    def rate(self, column: str) -> float:
        """Fraction of trials counted in ``open_bag``, ``partial`` or ``full``."""
        return float(getattr(self, column)) / self.trials if self.trials else 0.0


@dataclass(frozen=True)
class HarnessConfig:
    """Suite-level settings; read from the ``[harness]`` section."""

    trials_per_cell: int = 8
    workers: int = 1
    tiers: tuple[int, ...] = TIERS
    methods: tuple[Method, ...] = tuple(Method)
    log_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.tiers or any(t not in TIERS for t in self.tiers):
            raise ValueError(f"tiers must be a nonempty subset of {TIERS}")
        if not self.methods:
            raise ValueError("methods must not be empty")

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["tiers"] = list(self.tiers)
        data["methods"] = [m.value for m in self.methods]
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "HarnessConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"Unknown key(s) in [harness]: {', '.join(unknown)}")
        values = dict(data)
        if "tiers" in values:
            values["tiers"] = tuple(int(t) for t in values["tiers"])
        if "methods" in values:
            values["methods"] = tuple(Method(m) for m in values["methods"])
        return cls(**values)


# Real-robot results printed next to the simulated ones for context only.
# Columns: open bag, placed, partial, full, actions, time (s).
REAL_ROBOT_REFERENCE: dict[tuple[int, Method], tuple[str, ...]] = {
    (1, Method.ANALYTIC_PRIMITIVES): ("2/8", "0.4±0.7", "2/8", "1/8", "N/A", "N/A"),
    (1, Method.SHAKINGBOT): (
        "7/8",
        "1.6±0.7",
        "7/8",
        "6/8",
        "7.2±1.2",
        "178.5±15.7",
    ),
    (2, Method.ANALYTIC_PRIMITIVES): ("1/8", "0.3±0.7", "1/8", "1/8", "N/A", "N/A"),
    (2, Method.SHAKINGBOT): (
        "6/8",
        "1.5±0.9",
        "6/8",
        "6/8",
        "8.8±2.6",
        "193.6±29.5",
    ),
    (2, Method.SHAKINGBOT_A): ("2/6", "0.8±1.1", "2/6", "2/6", "N/A", "N/A"),
    (2, Method.SHAKINGBOT_H): ("0/6", "0.0±0.0", "0/6", "0/6", "N/A", "N/A"),
    (3, Method.ANALYTIC_PRIMITIVES): ("0/8", "0.0±0.0", "0/8", "0/8", "N/A", "N/A"),
    (3, Method.SHAKINGBOT): (
        "4/8",
        "0.6±0.8",
        "3/8",
        "2/8",
        "12.5±5.1",
        "227.1±47.9",
    ),
}


@dataclass
class SuiteResult:
    """Records of a suite sorted by (tier, method, seed) and their table rows."""

    records: list[TrialRecord]
    rows: list[ResultRow]

    def to_dict(self) -> dict[str, Any]:
        return {
            "records": [r.to_dict() for r in self.records],
            "rows": [asdict(row) | {"method": row.method.value} for row in self.rows],
        }


@dataclass(frozen=True)
class MechanismResult:
    """Paired per-seed measurements of a control run and a treated run."""

    name: str
    quantity: str
    seeds: tuple[int, ...]
    control: tuple[float, ...]
    treatment: tuple[float, ...]

    @property
    def deltas(self) -> tuple[float, ...]:
        return tuple(t - c for c, t in zip(self.control, self.treatment))

    @property
    def mean_delta(self) -> float:
        return sum(self.deltas) / len(self.deltas) if self.deltas else 0.0

    @property
    def holds(self) -> bool:
        """True when the treatment raises the quantity on average."""
        return self.mean_delta > 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "quantity": self.quantity,
            "seeds": list(self.seeds),
            "control": list(self.control),
            "treatment": list(self.treatment),
            "mean_delta": self.mean_delta,
            "holds": self.holds,
        }
