"""
Opening metrics of the bag: normalised hull area and hull elongation.

The rim is projected onto the table plane. The hull area is normalised by the
largest area a closed loop of the rest rim perimeter can bound, P^2 / (4 pi),
and the elongation is the square root of the ratio of the principal second
moments of the hull region.
"""

import logging
import math
from typing import Optional

import numpy as np
import structlog

from shakingbot_sim.metrics.geometry import (
    PointsLike,
    convex_hull_2d,
    polygon_area,
    polygon_second_moments,
)
from shakingbot_sim.metrics.models import (
    DEFAULT_E_CAP,
    DEGENERATE_AREA,
    LAMBDA_MIN_FLOOR,
    FloatArray,
    OpeningMetrics,
    OpeningThresholds,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)


def reference_area(rim_perimeter_rest: float) -> float:
    """Area of the circle whose circumference is the rest rim perimeter."""
    if not rim_perimeter_rest > 0:
        raise ValueError(f"rim_perimeter_rest must be > 0, got {rim_perimeter_rest}")
    return rim_perimeter_rest**2 / (4.0 * math.pi)


def hull_elongation(hull: FloatArray, e_cap: float = DEFAULT_E_CAP) -> float:
    moments = polygon_second_moments(hull)
    eigenvalues = np.linalg.eigvalsh(moments)
    lam_min = max(float(eigenvalues[0]), LAMBDA_MIN_FLOOR)
    lam_max = max(float(eigenvalues[1]), lam_min)
    return min(math.sqrt(lam_max / lam_min), e_cap)


def rim_pair_separation(rim: FloatArray) -> float:
    """
    Mean distance between front and back rim points.

    The rim runs along the front layer then back along the back layer, so the
    second half reversed lines up with the first half.
    """
    half = rim.shape[0] // 2
    if half == 0:
        return 0.0
    front = rim[:half]
    back = rim[rim.shape[0] - half :][::-1]
    return float(np.linalg.norm(front - back, axis=1).mean())


def hull_metrics(
    hull: FloatArray,
    rim_perimeter_rest: float,
    rim_separation: float = 0.0,
    e_cap: float = DEFAULT_E_CAP,
) -> OpeningMetrics:
    """Opening metrics for an already computed hull (m coordinates)."""
    area = polygon_area(hull)
    if area < DEGENERATE_AREA:
        return OpeningMetrics(hull, area, 0.0, e_cap, rim_separation, degenerate=True)
    return OpeningMetrics(
        hull=hull,
        area=area,
        a_ch=area / reference_area(rim_perimeter_rest),
        e_ch=hull_elongation(hull, e_cap),
        rim_separation=rim_separation,
    )


def opening_metrics(
    rim: PointsLike, rim_perimeter_rest: float, e_cap: float = DEFAULT_E_CAP
) -> OpeningMetrics:
    """
    Metrics of a rim given as 3D points in rim-cycle order.

    A rim collapsed to a segment or a point reports a_ch 0 and e_ch at the cap.

    Raises:
        ValueError: If the rim is empty or the perimeter is not positive
    """
    points = np.asarray(rim, dtype=np.float64)
    if points.size == 0:
        raise ValueError("opening_metrics needs a nonempty rim")
    points = points.reshape(-1, points.shape[-1])
    hull = convex_hull_2d(points[:, :2])
    return hull_metrics(hull, rim_perimeter_rest, rim_pair_separation(points), e_cap)


def opening_ok(
    metrics: OpeningMetrics, thresholds: Optional[OpeningThresholds] = None
) -> bool:
    """True when the opening is both large and round enough."""
    limits = thresholds or OpeningThresholds()
    return metrics.a_ch >= limits.a_min and metrics.e_ch <= limits.e_max
