"""Shared test utilities and fixtures."""

from typing import Any, Optional

import numpy as np
import pytest
from scipy import ndimage

from shakingbot_sim.bag_model import (
    BagSpec,
    BagState,
    PaintRegion,
    PhysicsParams,
    new_bag,
)
from shakingbot_sim.perception import Observation

# Coarse lattice keeps dynamic tests fast
SMALL_SPEC = BagSpec(resolution=8)


def make_bag(
    seed: int = 0,
    spec: BagSpec = SMALL_SPEC,
    **physics_changes: Any,
) -> BagState:
    """Helper to build a flat bag with optional PhysicsParams overrides."""
    return new_bag(spec, seed, PhysicsParams(**physics_changes))


def make_circle(n: int = 48, radius: float = 0.1, z: float = 0.0) -> np.ndarray:
    """Points on a horizontal circle, counter-clockwise from +x."""
    angle = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return np.stack(
        [radius * np.cos(angle), radius * np.sin(angle), np.full(n, z)], axis=1
    )


@pytest.fixture
def flat_bag() -> BagState:
    return make_bag()


@pytest.fixture
def weightless_bag() -> BagState:
    return make_bag(gravity=0.0)


def make_observation(
    depth: np.ndarray,
    underside: Optional[np.ndarray] = None,
    pixel_scale: float = 0.01,
) -> Observation:
    """Observation of a synthetic depth raster centred on the table origin."""
    rows, cols = depth.shape
    return Observation(
        depth=depth,
        rgb=np.zeros((rows, cols, 3), dtype=np.uint8),
        pixel_scale=pixel_scale,
        origin=(-cols * pixel_scale / 2.0, -rows * pixel_scale / 2.0),
        underside=underside,
    )


def count_components(mask: np.ndarray) -> int:
    """Number of 8-connected regions in a boolean mask."""
    _, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    return int(count)


def fold_handles_under(state: BagState) -> BagState:
    """Mirror the handle tabs below the rim row and push them under the body."""
    folded = state.copy()
    topo = folded.topology
    tab = topo.paint == int(PaintRegion.HANDLE)
    rim_y = folded.positions[topo.rim_cycle, 1].mean()
    folded.positions[tab, 1] = 2.0 * rim_y - folded.positions[tab, 1]
    folded.positions[tab, 2] = 0.0
    return folded
