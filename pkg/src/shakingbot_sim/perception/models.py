"""
Data models for synthetic perception: camera, observations, masks and scores.

Rasters are (rows, cols) arrays. Row v grows with world y and column u with
world x; pixel (v, u) covers the square whose centre is
``origin + ((u + 0.5) * pixel_scale, (v + 0.5) * pixel_scale)``.
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, NamedTuple, Optional

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]
BoolArray = NDArray[np.bool_]
ByteArray = NDArray[np.uint8]

# Class order of stacked masks
MASK_CLASSES = ("handle", "rim")
WORKSPACE_SIZE = (1.8, 1.2)
MIN_RASTER_SIZE = 64
MAX_DEPTH = 2.0


class HandleDetectionError(RuntimeError):
    """Fewer than two handle candidates were found."""


@dataclass(frozen=True)
class Camera:
    """Orthographic top-down camera over the table."""

    width: int = 256
    height: int = 192
    pixel_scale: float = 1.8 / 256
    origin: tuple[float, float] = (-0.9, -0.675)

    def __post_init__(self) -> None:
        if self.width < MIN_RASTER_SIZE or self.height < MIN_RASTER_SIZE:
            raise ValueError(
                f"Camera raster must be at least {MIN_RASTER_SIZE}x{MIN_RASTER_SIZE}, "
                f"got {self.width}x{self.height}"
            )
        if not self.pixel_scale > 0:
            raise ValueError(f"pixel_scale must be > 0, got {self.pixel_scale}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def covers_workspace(self) -> bool:
        span_x = self.width * self.pixel_scale
        span_y = self.height * self.pixel_scale
        return span_x >= WORKSPACE_SIZE[0] - 1e-9 and span_y >= WORKSPACE_SIZE[1] - 1e-9

    def world_to_pixel(self, xy: FloatArray) -> FloatArray:
        """Continuous (u, v) pixel coordinates, pixel centres at integers."""
        points = np.asarray(xy, dtype=np.float64)
        return (points[..., :2] - np.asarray(self.origin)) / self.pixel_scale - 0.5

    def pixel_to_world(self, uv: FloatArray) -> FloatArray:
        pixels = np.asarray(uv, dtype=np.float64)
        return np.asarray(self.origin) + (pixels + 0.5) * self.pixel_scale


@dataclass(frozen=True, eq=False)
class Observation:
    """Top-down depth and colour rasters of the scene."""

    depth: FloatArray
    rgb: ByteArray
    pixel_scale: float
    origin: tuple[float, float]
    underside: Optional[FloatArray] = None

    def __post_init__(self) -> None:
        rows, cols = self.depth.shape
        if rows < MIN_RASTER_SIZE or cols < MIN_RASTER_SIZE:
            raise ValueError(f"Observation raster too small: {cols}x{rows}")
        if self.rgb.shape != (rows, cols, 3):
            raise ValueError("rgb raster must match the depth raster")
        if not self.pixel_scale > 0:
            raise ValueError("pixel_scale must be > 0")
        if self.depth.min() < 0.0 or self.depth.max() > MAX_DEPTH:
            raise ValueError(f"Depth values must lie in [0, {MAX_DEPTH}] m")

    @property
    def camera(self) -> Camera:
        """The camera this observation was taken with."""
        rows, cols = self.depth.shape
        return Camera(cols, rows, self.pixel_scale, self.origin)

    @property
    def support(self) -> BoolArray:
        """Pixels where anything lies above the table."""
        return self.depth > 0.0


@dataclass(frozen=True, eq=False)
class Masks:
    """Handle and rim segmentation, optionally with class probabilities."""

    handle: BoolArray
    rim: BoolArray
    probabilities: Optional[FloatArray] = None

    def __post_init__(self) -> None:
        if self.handle.shape != self.rim.shape:
            raise ValueError("handle and rim masks must have the same shape")
        if self.probabilities is not None:
            if self.probabilities.shape != (len(MASK_CLASSES), *self.handle.shape):
                raise ValueError("probabilities must be stacked as (2, rows, cols)")
            if self.probabilities.min() < 0.0 or self.probabilities.max() > 1.0:
                raise ValueError("probabilities must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.handle.shape)

    def stack(self) -> BoolArray:
        """Boolean masks stacked in class order [handle, rim]."""
        return np.stack([self.handle, self.rim])

    @classmethod
    def from_stack(
        cls, stacked: BoolArray, probabilities: Optional[FloatArray] = None
    ) -> "Masks":
        return cls(
            np.asarray(stacked[0], dtype=bool),
            np.asarray(stacked[1], dtype=bool),
            probabilities,
        )


class DetectionStatus(str, Enum):
    BOTH = "both"
    PARTIAL = "partial"
    NONE = "none"


@dataclass(frozen=True)
class GraspDetection:
    """Handle grasp points in pixels as (u, v), sorted by u."""

    points: tuple[tuple[float, float], ...]
    status: DetectionStatus

    @property
    def missing(self) -> bool:
        return self.status is not DetectionStatus.BOTH


class ScoreResult(NamedTuple):
    loss: float
    miou: float
    mpa: float


class Corner(NamedTuple):
    """A clustered Harris response: centroid (u, v) and peak response."""

    u: float
    v: float
    strength: float


@dataclass(frozen=True, eq=False)
class CannyRim:
    """Largest edge component of a Canny pass and its convex hull."""

    points: FloatArray
    hull: FloatArray
    area: float


@dataclass(frozen=True)
class PerceptionConfig:
    """
    Operator constants. Hue windows use the 0-255 hue scale of 8-bit HSV.
    """

    camera: Camera = field(default_factory=Camera)
    harris_sigma: float = 1.5
    harris_k: float = 0.04
    harris_nms_radius: int = 3
    harris_threshold: float = 0.01
    harris_cluster_radius: float = 7.0
    canny_sigma: float = 1.0
    canny_low: float = 0.1
    canny_high: float = 0.3
    red_hue_max: int = 12
    red_hue_min: int = 243
    green_hue_min: int = 60
    green_hue_max: int = 110
    saturation_min: int = 100
    value_min: int = 60
    open_size: int = 3
    handle_disk_radius: int = 5
    prob_blur_sigma: float = 1.0
    prob_noise_sigma: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 < self.canny_low <= self.canny_high:
            raise ValueError("Canny thresholds need 0 < low <= high")
        if self.harris_sigma <= 0 or self.canny_sigma <= 0:
            raise ValueError("Filter sigmas must be > 0")
        if self.open_size < 1:
            raise ValueError("open_size must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
