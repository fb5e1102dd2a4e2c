"""
Orthographic top-down rendering of the bag.

Mesh triangles are rasterised with barycentric interpolation of height, and
every particle is splatted into its own pixel so that sheets seen edge-on stay
visible. Each pixel keeps the highest surface (depth), the lowest surface
(underside) and the paint region of the visible surface.
"""

import logging
import math
from typing import Optional

import numpy as np
import structlog

from shakingbot_sim.bag_model.models import BagState, PaintRegion
from shakingbot_sim.log_utils import log_function_call
from shakingbot_sim.perception.models import (
    MAX_DEPTH,
    ByteArray,
    Camera,
    FloatArray,
    Observation,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

TABLE_COLOR = (90, 90, 90)
BASE_COLOR = (235, 235, 235)
HANDLE_COLOR = (220, 30, 30)
RIM_COLOR = (40, 190, 60)
STRIPE_COLOR = (60, 80, 200)
STRIPE_PERIOD_PX = 8
PATTERNS = (None, "stripes")
# Region value of pixels that show no bag
NO_REGION = -1
BARYCENTRIC_EPS = 1e-9


class _Canvas:
    """Depth, underside and region rasters being filled in."""

    def __init__(self, camera: Camera) -> None:
        self.camera = camera
        self.depth = np.full(camera.shape, -np.inf)
        self.underside = np.full(camera.shape, np.inf)
        self.region = np.full(camera.shape, NO_REGION, dtype=np.int64)

    def triangle(self, uv: FloatArray, z: FloatArray, paint: np.ndarray) -> None:
        rows, cols = self.camera.shape
        u0 = max(int(math.ceil(uv[:, 0].min())), 0)
        u1 = min(int(math.floor(uv[:, 0].max())), cols - 1)
        v0 = max(int(math.ceil(uv[:, 1].min())), 0)
        v1 = min(int(math.floor(uv[:, 1].max())), rows - 1)
        if u0 > u1 or v0 > v1:
            return
        (ua, va), (ub, vb), (uc, vc) = uv
        det = (vb - vc) * (ua - uc) + (uc - ub) * (va - vc)
        if abs(det) < BARYCENTRIC_EPS:
            return
        gv, gu = np.mgrid[v0 : v1 + 1, u0 : u1 + 1].astype(np.float64)
        w_a = ((vb - vc) * (gu - uc) + (uc - ub) * (gv - vc)) / det
        w_b = ((vc - va) * (gu - uc) + (ua - uc) * (gv - vc)) / det
        w_c = 1.0 - w_a - w_b
        weights = np.stack([w_a, w_b, w_c])
        inside = np.all(weights >= -BARYCENTRIC_EPS, axis=0)
        if not inside.any():
            return
        height = w_a * z[0] + w_b * z[1] + w_c * z[2]
        nearest = paint[np.argmax(weights, axis=0)]

        window = (slice(v0, v1 + 1), slice(u0, u1 + 1))
        top = inside & (height > self.depth[window])
        self.depth[window][top] = height[top]
        self.region[window][top] = nearest[top]
        below = inside & (height < self.underside[window])
        self.underside[window][below] = height[below]

    def particles(self, uv: FloatArray, z: FloatArray, paint: np.ndarray) -> None:
        rows, cols = self.camera.shape
        pixel = np.rint(uv).astype(np.int64)
        valid = (
            (pixel[:, 0] >= 0)
            & (pixel[:, 0] < cols)
            & (pixel[:, 1] >= 0)
            & (pixel[:, 1] < rows)
        )
        if not valid.any():
            return
        u, v, z, paint = pixel[valid, 0], pixel[valid, 1], z[valid], paint[valid]
        key = v * cols + u
        order = np.lexsort((z, key))
        key, z, paint = key[order], z[order], paint[order]
        last = np.r_[key[1:] != key[:-1], True]
        first = np.r_[True, key[1:] != key[:-1]]

        flat_depth = self.depth.reshape(-1)
        flat_region = self.region.reshape(-1)
        flat_under = self.underside.reshape(-1)
        top_key, top_z, top_paint = key[last], z[last], paint[last]
        higher = top_z > flat_depth[top_key]
        flat_depth[top_key[higher]] = top_z[higher]
        flat_region[top_key[higher]] = top_paint[higher]
        low_key, low_z = key[first], z[first]
        lower = low_z < flat_under[low_key]
        flat_under[low_key[lower]] = low_z[lower]


def _colorize(
    region: np.ndarray,
    paint: bool,
    pattern: Optional[str],
    body_color: tuple[int, int, int],
) -> ByteArray:
    rgb = np.empty((*region.shape, 3), dtype=np.uint8)
    rgb[:] = TABLE_COLOR
    bag = region != NO_REGION
    rgb[bag] = body_color
    if pattern == "stripes":
        cols = np.arange(region.shape[1])
        stripe = ((cols // STRIPE_PERIOD_PX) % 2 == 0)[None, :]
        plain = (region == int(PaintRegion.BASE)) if paint else bag
        rgb[stripe & plain] = STRIPE_COLOR
    if paint:
        rgb[region == int(PaintRegion.HANDLE)] = HANDLE_COLOR
        rgb[region == int(PaintRegion.RIM_BAND)] = RIM_COLOR
    return rgb


def rasterize(
    state: Optional[BagState], camera: Camera
) -> tuple[FloatArray, FloatArray, np.ndarray]:
    """
    Depth, underside and paint-region rasters of a state (None for an empty scene).

    Empty pixels have depth 0, underside 0 and region NO_REGION.
    """
    canvas = _Canvas(camera)
    if state is not None:
        uv = camera.world_to_pixel(state.positions[:, :2])
        z = state.positions[:, 2]
        paint = state.topology.paint
        for tri in state.topology.triangles:
            canvas.triangle(uv[tri], z[tri], paint[tri])
        canvas.particles(uv, z, paint)
    empty = canvas.region == NO_REGION
    depth = np.where(empty, 0.0, np.clip(canvas.depth, 0.0, MAX_DEPTH))
    underside = np.where(empty, 0.0, np.clip(canvas.underside, 0.0, MAX_DEPTH))
    return depth, underside, canvas.region


@log_function_call
def render_topdown(
    state: Optional[BagState],
    camera: Optional[Camera] = None,
    paint: bool = True,
    pattern: Optional[str] = None,
    body_color: tuple[int, int, int] = BASE_COLOR,
) -> Observation:
    """
    Render depth and RGB rasters as seen from straight above.

    With ``paint`` the handle tabs are red and the rim band green; the optional
    ``pattern`` only affects the RGB raster.

    Raises:
        ValueError: If the camera does not cover the workspace or the pattern
            is unknown
    """
    camera = camera or Camera()
    if not camera.covers_workspace:
        raise ValueError("Camera does not cover the 1.8 x 1.2 m workspace")
    if pattern not in PATTERNS:
        raise ValueError(f"Unknown render pattern: {pattern}")
    depth, underside, region = rasterize(state, camera)
    return Observation(
        depth=depth,
        rgb=_colorize(region, paint, pattern, body_color),
        pixel_scale=camera.pixel_scale,
        origin=camera.origin,
        underside=underside,
    )
