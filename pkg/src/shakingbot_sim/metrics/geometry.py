"""
Planar polygon geometry: convex hulls, areas, moments and half-plane clipping.

Polygons are (k, 2) float arrays in counter-clockwise order without a repeated
closing vertex.
"""

from typing import Union

import numpy as np
from numpy.typing import ArrayLike

from shakingbot_sim.metrics.models import FloatArray

PointsLike = Union[ArrayLike, FloatArray]


Point2 = tuple[float, float]


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points: PointsLike) -> FloatArray:
    """
    Convex hull by the monotone chain, counter-clockwise.

    Collinear points are dropped, so collinear input gives its two end points
    and a single distinct point gives itself.

    Raises:
        ValueError: If no points are given
    """
    array = np.asarray(points, dtype=np.float64)
    if array.size == 0:
        raise ValueError("convex_hull_2d needs at least one point")
    array = array.reshape(-1, array.shape[-1])[:, :2]
    unique = sorted({(float(x), float(y)) for x, y in array})
    if len(unique) <= 2:
        return np.array(unique, dtype=np.float64)

    lower: list[Point2] = []
    for p in unique:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[Point2] = []
    for p in reversed(unique):
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)


def _edge_terms(
    polygon: FloatArray,
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray, FloatArray]:
    x, y = polygon[:, 0], polygon[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return x, y, xn, yn, x * yn - xn * y


def polygon_area(polygon: PointsLike) -> float:
    """Unsigned shoelace area; 0 for fewer than three vertices."""
    poly = np.asarray(polygon, dtype=np.float64).reshape(-1, 2)
    if poly.shape[0] < 3:
        return 0.0
    return float(abs(_edge_terms(poly)[4].sum()) / 2.0)


def polygon_centroid(polygon: PointsLike) -> FloatArray:
    """Area centroid, or the vertex mean when the polygon has no area."""
    poly = np.asarray(polygon, dtype=np.float64).reshape(-1, 2)
    if poly.shape[0] < 3:
        return poly.mean(axis=0)
    origin = poly.mean(axis=0)
    x, y, xn, yn, cross = _edge_terms(poly - origin)
    signed = cross.sum() / 2.0
    if abs(signed) < 1e-300:
        return origin
    cx = ((x + xn) * cross).sum() / (6.0 * signed)
    cy = ((y + yn) * cross).sum() / (6.0 * signed)
    return origin + np.array([cx, cy])


def polygon_second_moments(polygon: PointsLike) -> FloatArray:
    """
    Covariance (2x2) of a uniform distribution over the polygon's area.

    Returns zeros for polygons without area.
    """
    poly = np.asarray(polygon, dtype=np.float64).reshape(-1, 2)
    if polygon_area(poly) == 0.0:
        return np.zeros((2, 2))
    x, y, xn, yn, cross = _edge_terms(poly - polygon_centroid(poly))
    signed = cross.sum() / 2.0
    sxx = ((x * x + x * xn + xn * xn) * cross).sum() / 12.0
    syy = ((y * y + y * yn + yn * yn) * cross).sum() / 12.0
    sxy = ((x * yn + 2 * x * y + 2 * xn * yn + xn * y) * cross).sum() / 24.0
    return np.array([[sxx, sxy], [sxy, syy]]) / signed


def point_in_convex_polygon(
    point: PointsLike, polygon: PointsLike, tol: float = 1e-12
) -> bool:
    """True when the point lies inside or on a counter-clockwise convex polygon."""
    poly = np.asarray(polygon, dtype=np.float64).reshape(-1, 2)
    p = np.asarray(point, dtype=np.float64).reshape(-1)[:2]
    if poly.shape[0] < 3:
        return False
    edge = np.roll(poly, -1, axis=0) - poly
    rel = p - poly
    cross = edge[:, 0] * rel[:, 1] - edge[:, 1] * rel[:, 0]
    return bool(np.all(cross >= -tol))


def clip_polygon_halfplane(
    polygon: PointsLike, normal: PointsLike, offset: float
) -> FloatArray:
    """
    Part of a convex polygon where ``normal . p <= offset``.

    Returns an empty (0, 2) array when nothing remains.
    """
    poly = np.asarray(polygon, dtype=np.float64).reshape(-1, 2)
    n = np.asarray(normal, dtype=np.float64).reshape(2)
    kept: list[FloatArray] = []
    for current, following in zip(poly, np.roll(poly, -1, axis=0)):
        d_current = float(n @ current) - offset
        d_following = float(n @ following) - offset
        if d_current <= 0.0:
            kept.append(current)
        if (d_current < 0.0 < d_following) or (d_following < 0.0 < d_current):
            t = d_current / (d_current - d_following)
            kept.append(current + t * (following - current))
    if not kept:
        return np.zeros((0, 2))
    return np.array(kept)
