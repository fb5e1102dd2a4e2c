"""
Placement points for items dropped through the bag opening.

The opening hull is cut perpendicular to its principal axis into as many
equal-area strips as there are items; each item goes to the centroid of its
strip.
"""

import logging
from typing import Sequence

import numpy as np
import structlog

from shakingbot_sim.metrics.geometry import (
    PointsLike,
    clip_polygon_halfplane,
    polygon_area,
    polygon_centroid,
    polygon_second_moments,
)
from shakingbot_sim.metrics.models import FloatArray
from shakingbot_sim.policy.models import InsertionInfeasibleError, ItemSpec

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

DEGENERATE_AREA = 1e-6
ISOTROPIC_RTOL = 1e-9
BISECTION_STEPS = 60


def principal_axis(hull: FloatArray) -> FloatArray:
    """
    Unit major axis of the hull's area distribution.

    Returns the x axis when the distribution is isotropic. The sign puts the
    largest component positive.
    """
    eigenvalues, eigenvectors = np.linalg.eigh(polygon_second_moments(hull))
    if eigenvalues[1] - eigenvalues[0] <= ISOTROPIC_RTOL * max(eigenvalues[1], 1e-300):
        return np.array([1.0, 0.0])
    axis = eigenvectors[:, 1]
    if axis[int(np.argmax(np.abs(axis)))] < 0:
        axis = -axis
    return axis / np.linalg.norm(axis)


def _area_below(hull: FloatArray, axis: FloatArray, offset: float) -> float:
    return polygon_area(clip_polygon_halfplane(hull, axis, offset))


def _equal_area_cuts(hull: FloatArray, axis: FloatArray, count: int) -> list[float]:
    """Offsets along ``axis`` that split the hull into ``count`` equal areas."""
    projections = hull @ axis
    total = polygon_area(hull)
    cuts = []
    for index in range(1, count):
        target = total * index / count
        lo, hi = float(projections.min()), float(projections.max())
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if _area_below(hull, axis, mid) < target:
                lo = mid
            else:
                hi = mid
        cuts.append(0.5 * (lo + hi))
    return cuts


def insertion_plan(
    hull: PointsLike, items: Sequence[ItemSpec]
) -> list[tuple[float, float]]:
    """
    One placement point per item inside the opening hull.

    Args:
        hull: Counter-clockwise convex opening polygon in the table plane
        items: Items to place, in order

    Returns:
        Region centroids ordered along the principal axis

    Raises:
        InsertionInfeasibleError: If the hull is degenerate or a region is
            smaller than an item's footprint
    """
    polygon = np.asarray(hull, dtype=np.float64).reshape(-1, 2)
    area = polygon_area(polygon)
    if polygon.shape[0] < 3 or area < DEGENERATE_AREA:
        raise InsertionInfeasibleError(
            f"Opening is degenerate ({polygon.shape[0]} vertices, area {area:.2e} m^2)"
        )
    if not items:
        return []
    share = area / len(items)
    too_large = [item for item in items if item.footprint_area > share]
    if too_large:
        raise InsertionInfeasibleError(
            f"Item footprint {too_large[0].footprint_area:.4f} m^2 exceeds its "
            f"region of {share:.4f} m^2"
        )

    axis = principal_axis(polygon)
    bounds = [-np.inf, *_equal_area_cuts(polygon, axis, len(items)), np.inf]
    points = []
    for lower, upper in zip(bounds[:-1], bounds[1:]):
        region = polygon
        if np.isfinite(upper):
            region = clip_polygon_halfplane(region, axis, upper)
        if np.isfinite(lower):
            region = clip_polygon_halfplane(region, -axis, -lower)
        cx, cy = polygon_centroid(region)
        points.append((float(cx), float(cy)))
    structured_logger.debug(
        "Insertion plan", items=len(items), area=area, axis=axis.tolist()
    )
    return points
