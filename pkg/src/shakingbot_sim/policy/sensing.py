"""
Reading bag geometry off observations for the policy: the bag bottom, bag
centroid and world grasp points.
"""

import logging
from typing import Optional, Sequence

import numpy as np
import structlog

from shakingbot_sim.perception.models import FloatArray, Observation
from shakingbot_sim.policy.models import BottomSensing

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

DEFAULT_WINDOW_PX = 20


def _window(
    obs: Observation, centre_xy: Sequence[float], size: int
) -> tuple[slice, slice]:
    u, v = np.rint(obs.camera.world_to_pixel(np.asarray(centre_xy[:2]))).astype(int)
    rows, cols = obs.depth.shape
    top, left = v - size // 2, u - size // 2
    return (
        slice(min(max(top, 0), rows), min(max(top + size, 0), rows)),
        slice(min(max(left, 0), cols), min(max(left + size, 0), cols)),
    )


def bag_bottom_height(
    obs: Observation,
    centre_xy: Sequence[float],
    window_px: int = DEFAULT_WINDOW_PX,
    fallback: float = 0.0,
) -> BottomSensing:
    """
    Lowest bag surface inside a square window under ``centre_xy``.

    Uses the underside raster when the observation has one, else the depth
    raster. Only pixels that show the bag count; an empty window gives the
    fallback height with ``sensed`` False.
    """
    window = _window(obs, centre_xy, window_px)
    support = obs.support[window]
    if not support.any():
        structured_logger.warning(
            "Bag bottom not sensed",
            centre=[float(c) for c in centre_xy[:2]],
            fallback=fallback,
        )
        return BottomSensing(fallback, False)
    surface = obs.underside if obs.underside is not None else obs.depth
    return BottomSensing(float(surface[window][support].min()), True)


def support_centroid(obs: Observation) -> Optional[FloatArray]:
    """World xy centroid of the pixels that show the bag, or None for none."""
    rows, cols = np.nonzero(obs.support)
    if rows.size == 0:
        return None
    return obs.camera.pixel_to_world(np.array([cols.mean(), rows.mean()]))


def nearest_support_pixel(
    obs: Observation, xy: Sequence[float]
) -> Optional[tuple[float, float]]:
    """(u, v) of the bag pixel closest to a world point."""
    rows, cols = np.nonzero(obs.support)
    if rows.size == 0:
        return None
    u, v = obs.camera.world_to_pixel(np.asarray(xy[:2]))
    index = int(np.argmin((cols - u) ** 2 + (rows - v) ** 2))
    return (float(cols[index]), float(rows[index]))


def grasp_point_3d(
    obs: Observation, uv: Sequence[float]
) -> tuple[float, float, float]:
    """World grasp point for a pixel: its centre, on the visible surface."""
    rows, cols = obs.depth.shape
    u = int(np.clip(np.rint(uv[0]), 0, cols - 1))
    v = int(np.clip(np.rint(uv[1]), 0, rows - 1))
    x, y = obs.camera.pixel_to_world(np.array([u, v], dtype=np.float64))
    return (float(x), float(y), float(obs.depth[v, u]))
