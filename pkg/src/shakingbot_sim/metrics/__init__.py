"""
Bag-opening metrics and the planar geometry they are built on.
"""

from shakingbot_sim.metrics.geometry import (
    clip_polygon_halfplane,
    convex_hull_2d,
    point_in_convex_polygon,
    polygon_area,
    polygon_centroid,
    polygon_second_moments,
)
from shakingbot_sim.metrics.models import (
    DEFAULT_E_CAP,
    OpeningMetrics,
    OpeningThresholds,
)
from shakingbot_sim.metrics.opening import (
    hull_elongation,
    hull_metrics,
    opening_metrics,
    opening_ok,
    reference_area,
    rim_pair_separation,
)

__all__ = [
    "DEFAULT_E_CAP",
    "OpeningMetrics",
    "OpeningThresholds",
    "clip_polygon_halfplane",
    "convex_hull_2d",
    "point_in_convex_polygon",
    "polygon_area",
    "polygon_centroid",
    "polygon_second_moments",
    "hull_elongation",
    "hull_metrics",
    "opening_metrics",
    "opening_ok",
    "reference_area",
    "rim_pair_separation",
]
