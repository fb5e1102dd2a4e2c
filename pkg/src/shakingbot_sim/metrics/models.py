"""
Data models for bag-opening metrics.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

# Elongation reported for hulls with no area
DEFAULT_E_CAP = 100.0
# Floor on the minor second moment, in m^2
LAMBDA_MIN_FLOOR = 1e-12
# Hull area below which the opening counts as collapsed, in m^2
DEGENERATE_AREA = 1e-12


@dataclass(frozen=True)
class OpeningThresholds:
    """
    Sufficiency thresholds on the normalised hull area and elongation.

    ``e_cap`` is the elongation reported for a rim with no area or a
    degenerate minor axis.
    """

    a_min: float = 0.4
    e_max: float = 2.5
    e_cap: float = DEFAULT_E_CAP

    def __post_init__(self) -> None:
        if not 0.0 < self.a_min < 1.0:
            raise ValueError(f"a_min must lie in (0, 1), got {self.a_min}")
        if not self.e_max > 1.0:
            raise ValueError(f"e_max must be > 1, got {self.e_max}")
        if not self.e_cap >= self.e_max:
            raise ValueError(f"e_cap must be >= e_max, got {self.e_cap}")


@dataclass(frozen=True, eq=False)
class OpeningMetrics:
    """Opening of the bag seen from above."""

    hull: FloatArray
    area: float
    a_ch: float
    e_ch: float
    rim_separation: float
    degenerate: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "area": self.area,
            "a_ch": self.a_ch,
            "e_ch": self.e_ch,
            "rim_separation": self.rim_separation,
            "degenerate": self.degenerate,
            "hull_vertices": int(self.hull.shape[0]),
        }
