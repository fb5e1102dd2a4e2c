"""
Synthetic perception: top-down rendering, oracle and colour labelling, the
analytic Harris/Canny baseline and mask scoring.
"""

from shakingbot_sim.perception.analytic import (
    analytic_masks,
    canny_edges,
    canny_rim,
    grasp_points,
    harris_corners,
    harris_handles,
    harris_response,
    largest_component,
    sobel_gradients,
)
from shakingbot_sim.perception.labeling import (
    hsv_autolabel,
    mask_iou,
    masks_from_regions,
    oracle_masks,
)
from shakingbot_sim.perception.models import (
    MASK_CLASSES,
    MAX_DEPTH,
    WORKSPACE_SIZE,
    Camera,
    CannyRim,
    Corner,
    DetectionStatus,
    GraspDetection,
    HandleDetectionError,
    Masks,
    Observation,
    PerceptionConfig,
    ScoreResult,
)
from shakingbot_sim.perception.raster_io import (
    read_depth_pgm,
    read_mask_png,
    read_png,
    write_depth_pgm,
    write_mask_png,
    write_png,
)
from shakingbot_sim.perception.render import (
    BASE_COLOR,
    HANDLE_COLOR,
    NO_REGION,
    PATTERNS,
    RIM_COLOR,
    rasterize,
    render_topdown,
)
from shakingbot_sim.perception.scoring import (
    balanced_weights,
    bce_gradient,
    noisy_probabilities,
    score_masks,
    weighted_bce,
)

__all__ = [
    # Models
    "MASK_CLASSES",
    "MAX_DEPTH",
    "WORKSPACE_SIZE",
    "Camera",
    "CannyRim",
    "Corner",
    "DetectionStatus",
    "GraspDetection",
    "HandleDetectionError",
    "Masks",
    "Observation",
    "PerceptionConfig",
    "ScoreResult",
    # Rendering and labelling
    "BASE_COLOR",
    "HANDLE_COLOR",
    "NO_REGION",
    "PATTERNS",
    "RIM_COLOR",
    "rasterize",
    "render_topdown",
    "hsv_autolabel",
    "mask_iou",
    "masks_from_regions",
    "oracle_masks",
    # Analytic baseline
    "analytic_masks",
    "canny_edges",
    "canny_rim",
    "grasp_points",
    "harris_corners",
    "harris_handles",
    "harris_response",
    "largest_component",
    "sobel_gradients",
    # Scoring
    "balanced_weights",
    "bce_gradient",
    "noisy_probabilities",
    "score_masks",
    "weighted_bce",
    # Raster files
    "read_depth_pgm",
    "read_mask_png",
    "read_png",
    "write_depth_pgm",
    "write_mask_png",
    "write_png",
]
