"""
Ground-truth segmentation: oracle masks from the simulator and colour-based
auto-labelling of painted renders.
"""

import logging
from typing import Optional

import numpy as np
import structlog
from PIL import Image
from scipy import ndimage

from shakingbot_sim.bag_model.models import BagState, PaintRegion
from shakingbot_sim.perception.models import (
    BoolArray,
    ByteArray,
    Camera,
    Masks,
    PerceptionConfig,
)
from shakingbot_sim.perception.render import rasterize

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)


def masks_from_regions(region: np.ndarray) -> Masks:
    return Masks(
        handle=region == int(PaintRegion.HANDLE),
        rim=region == int(PaintRegion.RIM_BAND),
    )


def oracle_masks(state: Optional[BagState], camera: Optional[Camera] = None) -> Masks:
    """
    Class of the visible surface in every pixel.

    Only the topmost surface counts, so a handle folded under the body is not
    labelled.
    """
    _, _, region = rasterize(state, camera or Camera())
    return masks_from_regions(region)


def _open(mask: BoolArray, size: int) -> BoolArray:
    if size <= 1:
        return mask
    structure = np.ones((size, size), dtype=bool)
    return np.asarray(ndimage.binary_opening(mask, structure=structure), dtype=bool)


def hsv_autolabel(rgb: ByteArray, config: Optional[PerceptionConfig] = None) -> Masks:
    """
    Threshold red and green paint in HSV space, then open each mask.

    Red pixels become the handle mask and green pixels the rim mask.
    """
    cfg = config or PerceptionConfig()
    image = Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8))
    hsv = np.asarray(image.convert("HSV"), dtype=np.int64)
    hue, saturation, value = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    vivid = (saturation >= cfg.saturation_min) & (value >= cfg.value_min)
    red = vivid & ((hue <= cfg.red_hue_max) | (hue >= cfg.red_hue_min))
    green = vivid & (hue >= cfg.green_hue_min) & (hue <= cfg.green_hue_max)
    return Masks(handle=_open(red, cfg.open_size), rim=_open(green, cfg.open_size))


def mask_iou(a: BoolArray, b: BoolArray) -> float:
    """Intersection over union of two boolean masks; 1.0 when both are empty."""
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)
