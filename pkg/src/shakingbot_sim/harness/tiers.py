"""
Scripted initial configurations for the three difficulty tiers.

A flat bag is crumpled with a smooth seeded displacement field, its rim is
spread open by a tier-dependent amount and parts of it are folded over. Each
attempt is checked against the tier's visibility and opening predicate; the
crumple magnitudes are this simulator's operationalisation of the manual
initialisation of real trials.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog
from scipy import ndimage

from shakingbot_sim.bag_model import (
    BagSpec,
    BagState,
    PhysicsParams,
    new_bag,
    place_rigidly,
    rim_points,
)
from shakingbot_sim.harness.models import (
    MAX_TIER_RETRIES,
    TIER_AREA_SPLIT,
    TIERS,
    TierGenerationError,
)
from shakingbot_sim.log_utils import log_function_call
from shakingbot_sim.metrics import opening_metrics
from shakingbot_sim.perception import Camera, oracle_masks

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

# Smoothing of the crumple field, in lattice cells
CRUMPLE_SMOOTHING = 1.5
# Rows below the rim over which the opening spread fades out
OPENING_TAPER_ROWS = 3
# Extra lift of a folded flap above the surface it lands on
FOLD_GAP_RADII = 2.0
# Attempt seeds are spaced so that neighbouring trial seeds never share one
ATTEMPT_STRIDE = 1000


@dataclass(frozen=True)
class TierRecipe:
    """Perturbation magnitudes of one tier. Lengths in m."""

    jitter_sigma: float
    opening_range: tuple[float, float]
    corner_folds: int
    fold_range: tuple[float, float]
    fold_over: bool = False


TIER_RECIPES: dict[int, TierRecipe] = {
    1: TierRecipe(0.01, (0.30, 0.45), 1, (0.05, 0.08)),
    2: TierRecipe(0.02, (0.0, 0.05), 2, (0.06, 0.10)),
    3: TierRecipe(0.02, (0.0, 0.10), 0, (0.0, 0.0), fold_over=True),
}


def handle_components(state: BagState, camera: Optional[Camera] = None) -> int:
    """Number of separate handle regions visible from above."""
    mask = oracle_masks(state, camera).handle
    _, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    return int(count)


def rim_area_ratio(state: BagState) -> float:
    return opening_metrics(rim_points(state), state.rim_perimeter_rest).a_ch


def tier_predicate(
    tier: int,
    state: BagState,
    camera: Optional[Camera] = None,
    area_split: float = TIER_AREA_SPLIT,
) -> bool:
    """
    True when ``state`` belongs to ``tier``.

    Tier 1 shows both handles and a rim area of at least ``area_split`` of the
    maximum; tier 2 shows both handles and a smaller rim; tier 3 hides at least
    one handle.
    """
    handles = handle_components(state, camera)
    if tier == 3:
        return handles <= 1
    if handles != 2:
        return False
    a_ch = rim_area_ratio(state)
    return a_ch >= area_split if tier == 1 else a_ch < area_split


def _crumple(state: BagState, sigma: float, rng: np.random.Generator) -> None:
    """Smooth displacement shared by both layers; lifts only, never sinks."""
    topo = state.topology
    shape = (topo.ny + topo.tab_rows, topo.nx)
    cols, rows = topo.grid[:, 0], topo.grid[:, 1]
    for axis in range(3):
        field = ndimage.gaussian_filter(rng.standard_normal(shape), CRUMPLE_SMOOTHING)
        field /= max(float(field.std()), 1e-12)
        values = field[rows, cols]
        if axis == 2:
            state.positions[:, 2] += sigma * np.abs(values)
        else:
            state.positions[:, axis] += 0.5 * sigma * values


def _spread_opening(state: BagState, depth: float) -> None:
    """Pull the front rim towards -y and the back rim towards +y."""
    if depth <= 0.0:
        return
    topo = state.topology
    cols, rows = topo.grid[:, 0], topo.grid[:, 1]
    rim_row = topo.ny - 1
    profile = np.sin(math.pi * cols / (topo.nx - 1))
    taper = np.clip(1.0 - (rim_row - rows) / OPENING_TAPER_ROWS, 0.0, 1.0)
    side = np.where(topo.layers == 0, -1.0, 1.0)
    state.positions[:, 1] += side * 0.5 * depth * profile * taper


def _fold(state: BagState, point: np.ndarray, normal: np.ndarray) -> None:
    """Reflect everything on the +normal side of the line onto the other side."""
    xy = state.positions[:, :2]
    offset = (xy - point) @ normal
    flap = offset > 0.0
    if not flap.any() or flap.all():
        return
    top = float(state.positions[~flap, 2].max())
    gap = FOLD_GAP_RADII * state.physics.particle_radius
    state.positions[flap, :2] -= 2.0 * offset[flap, None] * normal
    state.positions[flap, 2] = top + gap + (top - state.positions[flap, 2])


def _corner_fold(
    state: BagState, spec: BagSpec, size: float, right: bool, rng: np.random.Generator
) -> None:
    sign = 1.0 if right else -1.0
    a = size * rng.uniform(0.8, 1.2)
    b = size * rng.uniform(0.8, 1.2)
    corner = np.array([sign * spec.width / 2.0, -spec.height / 2.0])
    start = corner + np.array([-sign * a, 0.0])
    end = corner + np.array([0.0, b])
    direction = (end - start) / np.linalg.norm(end - start)
    normal = np.array([direction[1], -direction[0]])
    if np.dot(corner - start, normal) < 0.0:
        normal = -normal
    _fold(state, start, normal)


def _fold_over(state: BagState, spec: BagSpec, rng: np.random.Generator) -> None:
    """Fold the lower body up over the rim so that it lands on the handles."""
    lowest = spec.handle_height / 2.0 + 0.01
    highest = max(lowest, spec.height / 2.0 - 0.02)
    y0 = rng.uniform(lowest, highest)
    tilt = rng.uniform(-0.3, 0.3)
    normal = np.array([tilt, -1.0]) / math.hypot(tilt, 1.0)
    _fold(state, np.array([0.0, y0]), normal)


def perturb(
    flat: BagState, tier: int, seed: int, recipe: Optional[TierRecipe] = None
) -> BagState:
    """One seeded attempt at a tier configuration, without checking it."""
    recipe = recipe or TIER_RECIPES[tier]
    rng = np.random.default_rng(seed)
    spec = flat.spec
    state = flat.copy()
    _crumple(state, recipe.jitter_sigma, rng)
    low, high = recipe.opening_range
    _spread_opening(state, spec.width * rng.uniform(low, high))
    first_right = bool(rng.integers(2))
    for k in range(recipe.corner_folds):
        size = rng.uniform(*recipe.fold_range)
        _corner_fold(state, spec, size, first_right ^ bool(k % 2), rng)
    if recipe.fold_over:
        _fold_over(state, spec, rng)
    state.positions[:, 2] = np.maximum(
        state.positions[:, 2], state.physics.particle_radius
    )
    angle = rng.uniform(-0.2, 0.2)
    offset = (rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05))
    return place_rigidly(state, angle, offset)


@log_function_call
def gen_tier(
    tier: int,
    spec: BagSpec,
    seed: int,
    physics: Optional[PhysicsParams] = None,
    camera: Optional[Camera] = None,
    max_retries: int = MAX_TIER_RETRIES,
    area_split: float = TIER_AREA_SPLIT,
) -> BagState:
    """
    Generate the initial bag of a trial.

    Attempts use seeds derived from ``seed`` and stop at the first one that
    meets the tier predicate, so the result depends only on the arguments.

    Args:
        tier: Difficulty tier, 1 to 3
        spec: Flat bag to start from
        seed: Trial seed
        physics: Simulation constants of the bag
        camera: Camera used for the visibility check
        max_retries: Attempts before giving up
        area_split: Normalised rim area separating tier 1 from tier 2

    Returns:
        The perturbed bag with zero velocities, every particle on or above the
        table. It is not settled under gravity

    Raises:
        ValueError: If the tier is unknown
        TierGenerationError: If no attempt meets the predicate
    """
    if tier not in TIERS:
        raise ValueError(f"tier must be one of {TIERS}, got {tier}")
    flat = new_bag(spec, seed, physics)
    for attempt in range(max_retries):
        state = perturb(flat, tier, seed * ATTEMPT_STRIDE + attempt)
        if tier_predicate(tier, state, camera, area_split):
            structured_logger.debug(
                "Tier generated", tier=tier, seed=seed, attempts=attempt + 1
            )
            return state
    logger.warning(f"Tier {tier} generation failed for seed {seed}")
    structured_logger.warning(
        "Tier generation failed", tier=tier, seed=seed, attempts=max_retries
    )
    raise TierGenerationError(tier, seed, max_retries)
