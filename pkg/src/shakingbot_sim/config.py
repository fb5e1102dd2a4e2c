"""
Configuration file loading.

One TOML file holds every tunable constant. Each component owns its settings
as a frozen dataclass; this module only maps TOML sections onto them:

    budget = 15
    [bag]  [physics]  [primitives]  [perception]  [perception.camera]
    [policy]  [policy.thresholds]  [harness]  [[items]]

Missing keys keep their defaults. Unknown keys raise ValueError naming the
section and the key.
"""

import logging
import tomllib
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Optional, TypeVar

import structlog

from shakingbot_sim.bag_model import BagSpec, PhysicsParams
from shakingbot_sim.harness import HarnessConfig, Method, TrialConfig
from shakingbot_sim.log_utils import log_function_call
from shakingbot_sim.perception import PerceptionConfig
from shakingbot_sim.policy import DEFAULT_BUDGET, ItemSpec, PolicyConfig, default_items
from shakingbot_sim.primitives import PrimitiveConfig
from shakingbot_sim.utils.file_utils import PathLike

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

C = TypeVar("C")

TOP_LEVEL_KEYS = frozenset(
    {
        "budget",
        "bag",
        "physics",
        "primitives",
        "perception",
        "policy",
        "harness",
        "items",
    }
)


def _unknown_keys(section: str, data: dict[str, Any], known: set[str]) -> None:
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"Unknown key(s) in [{section}]: {', '.join(unknown)}")


def build_section(cls: type[C], data: dict[str, Any], section: str) -> C:
    """
    Build a settings dataclass from one TOML table.

    Nested tables fill nested dataclass fields; arrays become tuples.
    """
    if not isinstance(data, dict):
        raise ValueError(f"[{section}] must be a table")
    known = {f.name: f for f in fields(cls)}  # type: ignore[arg-type]
    _unknown_keys(section, data, set(known))
    values: dict[str, Any] = {}
    for name, value in data.items():
        factory = known[name].default_factory
        if isinstance(factory, type) and is_dataclass(factory):
            values[name] = build_section(factory, value, f"{section}.{name}")
        elif isinstance(value, list):
            values[name] = tuple(value)
        else:
            values[name] = value
    try:
        return cls(**values)
    except TypeError as e:
        raise ValueError(f"Invalid value in [{section}]: {e}") from e


@dataclass(frozen=True)
class SimConfig:
    """All settings of a simulation run."""

    bag: BagSpec = field(default_factory=BagSpec)
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    primitives: PrimitiveConfig = field(default_factory=PrimitiveConfig)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)
    items: tuple[ItemSpec, ...] = field(default_factory=default_items)
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise ValueError(f"budget must be >= 0, got {self.budget}")
        if not self.items:
            raise ValueError("At least one item is required")

    def trial_config(
        self, method: Method = Method.SHAKINGBOT, tier: int = 1, seed: int = 0
    ) -> TrialConfig:
        """Settings of one trial of ``method`` on ``tier``."""
        return TrialConfig(
            method=method,
            tier=tier,
            seed=seed,
            bag=self.bag,
            items=self.items,
            thresholds=self.policy.thresholds,
            budget=self.budget,
            physics=self.physics,
            primitives=self.primitives,
            perception=self.perception,
            policy=self.policy,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "budget": self.budget,
            "bag": self.bag.to_dict(),
            "physics": self.physics.to_dict(),
            "primitives": asdict(self.primitives),
            "perception": self.perception.to_dict(),
            "policy": self.policy.to_dict(),
            "harness": self.harness.to_dict(),
            "items": [item.to_dict() for item in self.items],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimConfig":
        """
        Build a SimConfig from parsed TOML.

        Raises:
            ValueError: For unknown sections or keys, or invalid values
        """
        _unknown_keys("top level", data, set(TOP_LEVEL_KEYS))
        values: dict[str, Any] = {}
        if "bag" in data:
            values["bag"] = BagSpec.from_dict(data["bag"])
        for name, settings in (
            ("physics", PhysicsParams),
            ("primitives", PrimitiveConfig),
            ("perception", PerceptionConfig),
            ("policy", PolicyConfig),
        ):
            if name in data:
                values[name] = build_section(settings, data[name], name)
        if "harness" in data:
            values["harness"] = HarnessConfig.from_dict(data["harness"])
        if "items" in data:
            values["items"] = tuple(ItemSpec.from_dict(item) for item in data["items"])
        if "budget" in data:
            values["budget"] = data["budget"]
        return cls(**values)


@log_function_call
def load_config(path: Optional[PathLike] = None) -> SimConfig:
    """
    Load settings from a TOML file.

    Args:
        path: Config file; None gives the defaults

    Returns:
        The loaded SimConfig

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the file is not valid TOML or holds unknown keys
    """
    if path is None:
        return SimConfig()
    config_path = Path(path)
    with config_path.open("rb") as f:
        data = tomllib.load(f)
    config = SimConfig.from_dict(data)
    structured_logger.info(
        "Config loaded", path=str(config_path), sections=sorted(data)
    )
    return config
