"""
Analytic baseline operators on depth rasters: Harris corners for the handles
and Canny edges for the rim.
"""

import logging
import math
from typing import Optional

import numpy as np
import structlog
from scipy import ndimage

from shakingbot_sim.metrics.geometry import convex_hull_2d, polygon_area
from shakingbot_sim.perception.models import (
    BoolArray,
    CannyRim,
    Corner,
    DetectionStatus,
    FloatArray,
    GraspDetection,
    HandleDetectionError,
    Masks,
    PerceptionConfig,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def _config(config: Optional[PerceptionConfig]) -> PerceptionConfig:
    return config or PerceptionConfig()


def sobel_gradients(image: FloatArray) -> tuple[FloatArray, FloatArray]:
    """(Ix, Iy): derivatives along columns and rows, edge-replicated borders."""
    image = np.asarray(image, dtype=np.float64)
    ix = ndimage.sobel(image, axis=1, mode="nearest")
    iy = ndimage.sobel(image, axis=0, mode="nearest")
    return ix, iy


def harris_response(image: FloatArray, sigma: float, k: float) -> FloatArray:
    """R = det(M) - k * trace(M)^2 of the Gaussian-windowed structure tensor."""
    ix, iy = sobel_gradients(image)
    sxx = ndimage.gaussian_filter(ix * ix, sigma, mode="nearest")
    syy = ndimage.gaussian_filter(iy * iy, sigma, mode="nearest")
    sxy = ndimage.gaussian_filter(ix * iy, sigma, mode="nearest")
    return sxx * syy - sxy * sxy - k * (sxx + syy) ** 2


def harris_corners(
    image: FloatArray, config: Optional[PerceptionConfig] = None
) -> list[Corner]:
    """
    Clustered Harris corners, strongest first.

    Peaks are local maxima over a (2r+1) square window above a fraction of the
    global maximum response; peaks closer than the cluster radius to a
    stronger cluster merge into it with response-weighted centroids.
    """
    cfg = _config(config)
    response = harris_response(image, cfg.harris_sigma, cfg.harris_k)
    peak_value = float(response.max())
    if peak_value <= 0.0:
        return []
    threshold = cfg.harris_threshold * peak_value
    size = 2 * cfg.harris_nms_radius + 1
    local_max = ndimage.maximum_filter(response, size=size, mode="nearest")
    rows, cols = np.nonzero((response == local_max) & (response > threshold))
    strengths = response[rows, cols]
    order = np.argsort(-strengths, kind="stable")

    seeds: list[tuple[float, float]] = []
    members: list[list[tuple[float, float, float]]] = []
    for idx in order:
        u, v, r = float(cols[idx]), float(rows[idx]), float(strengths[idx])
        for seed, group in zip(seeds, members):
            if math.hypot(u - seed[0], v - seed[1]) <= cfg.harris_cluster_radius:
                group.append((u, v, r))
                break
        else:
            seeds.append((u, v))
            members.append([(u, v, r)])

    corners = []
    for group in members:
        weights = np.array([m[2] for m in group])
        us = np.array([m[0] for m in group])
        vs = np.array([m[1] for m in group])
        total = weights.sum()
        corners.append(
            Corner(
                float((us * weights).sum() / total),
                float((vs * weights).sum() / total),
                float(weights.max()),
            )
        )
    return corners


def harris_handles(
    depth: FloatArray, config: Optional[PerceptionConfig] = None
) -> tuple[tuple[float, float], tuple[float, float]]:
    """
    The two strongest Harris clusters as (u, v) pixel points, sorted by u.

    Raises:
        HandleDetectionError: If fewer than two clusters clear the threshold
    """
    corners = harris_corners(depth, config)
    if len(corners) < 2:
        raise HandleDetectionError(
            f"Harris found {len(corners)} handle candidate(s), need 2"
        )
    first, second = sorted(corners[:2], key=lambda c: c.u)
    return (first.u, first.v), (second.u, second.v)


def _non_maximum_suppression(magnitude: FloatArray, angle: FloatArray) -> BoolArray:
    """
    Keep pixels that are maximal across the edge.

    Ties are broken toward the lower side, so a symmetric ridge keeps exactly
    one pixel.
    """
    direction = np.rint(angle / (np.pi / 4)).astype(np.int64) % 4
    # (row, col) step along the gradient for each quantised direction
    steps = ((0, 1), (1, 1), (1, 0), (1, -1))
    padded = np.pad(magnitude, 1, mode="constant")
    rows, cols = magnitude.shape
    keep = np.zeros(magnitude.shape, dtype=bool)
    for index, (dr, dc) in enumerate(steps):
        forward = padded[1 + dr : 1 + dr + rows, 1 + dc : 1 + dc + cols]
        backward = padded[1 - dr : 1 - dr + rows, 1 - dc : 1 - dc + cols]
        selected = direction == index
        keep |= selected & (magnitude >= forward) & (magnitude > backward)
    return keep & (magnitude > 0.0)


def canny_edges(
    image: FloatArray, config: Optional[PerceptionConfig] = None
) -> BoolArray:
    """
    Canny edge map: blur, Sobel, non-maximum suppression and hysteresis.

    Thresholds are fractions of the largest gradient magnitude; weak edges
    survive only when 8-connected to a strong edge.
    """
    cfg = _config(config)
    smoothed = ndimage.gaussian_filter(
        np.asarray(image, dtype=np.float64), cfg.canny_sigma, mode="nearest"
    )
    gx, gy = sobel_gradients(smoothed)
    magnitude = np.hypot(gx, gy)
    peak = float(magnitude.max())
    if peak <= 0.0:
        return np.zeros(magnitude.shape, dtype=bool)
    thin = _non_maximum_suppression(magnitude, np.arctan2(gy, gx))
    weak = thin & (magnitude >= cfg.canny_low * peak)
    strong = thin & (magnitude >= cfg.canny_high * peak)
    labels, count = ndimage.label(weak, structure=EIGHT_CONNECTED)
    if count == 0:
        return weak
    keep = np.zeros(count + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return keep[labels]


def largest_component(mask: BoolArray) -> BoolArray:
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        return np.zeros(mask.shape, dtype=bool)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    sizes[0] = 0
    return labels == int(np.argmax(sizes))


def canny_rim(
    depth: FloatArray,
    pixel_scale: float,
    config: Optional[PerceptionConfig] = None,
) -> CannyRim:
    """
    Rim estimate: the largest connected Canny edge component and its hull.

    Points and hull are (u, v) pixel coordinates; the area is in m^2. No edges
    gives an empty rim with area 0.
    """
    component = largest_component(canny_edges(depth, config))
    rows, cols = np.nonzero(component)
    if rows.size == 0:
        empty = np.zeros((0, 2))
        return CannyRim(empty, empty, 0.0)
    points = np.stack([cols, rows], axis=1).astype(np.float64)
    hull = convex_hull_2d(points)
    return CannyRim(points, hull, polygon_area(hull) * pixel_scale**2)


def _disks(
    shape: tuple[int, ...], centres: list[tuple[float, float]], radius: int
) -> BoolArray:
    rows, cols = np.mgrid[0 : shape[0], 0 : shape[1]]
    mask = np.zeros(shape, dtype=bool)
    for u, v in centres:
        mask |= (cols - u) ** 2 + (rows - v) ** 2 <= radius**2
    return mask


def analytic_masks(
    depth: FloatArray, config: Optional[PerceptionConfig] = None
) -> Masks:
    """Masks from the analytic operators: disks at Harris handles, Canny rim pixels."""
    cfg = _config(config)
    corners = harris_corners(depth, cfg)[:2]
    handle = _disks(depth.shape, [(c.u, c.v) for c in corners], cfg.handle_disk_radius)
    rim = largest_component(canny_edges(depth, cfg))
    return Masks(handle=handle, rim=rim & ~handle)


def grasp_points(masks: Masks) -> GraspDetection:
    """
    Centroids of the two largest handle components as (u, v), sorted by u.

    One component gives a partial detection; none gives an empty one.
    """
    labels, count = ndimage.label(masks.handle, structure=EIGHT_CONNECTED)
    if count == 0:
        return GraspDetection((), DetectionStatus.NONE)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    largest = (np.argsort(-sizes, kind="stable")[:2] + 1).tolist()
    centres = ndimage.center_of_mass(masks.handle, labels, largest)
    points = sorted((float(c[1]), float(c[0])) for c in centres)
    status = DetectionStatus.BOTH if len(points) == 2 else DetectionStatus.PARTIAL
    return GraspDetection(tuple(points), status)
