"""
Read-only geometric queries on a bag state, plus rigid placement helpers.
"""

import math

import numpy as np

from shakingbot_sim.bag_model.models import (
    BagState,
    FloatArray,
    ParticleLabel,
    RimInvariantError,
)


def rim_points(state: BagState) -> FloatArray:
    """
    Rim particle positions in rim-cycle order.

    The cycle runs along the front layer's top row left to right, then back
    along the back layer's top row.

    Raises:
        RimInvariantError: If the state has no rim cycle
    """
    cycle = state.topology.rim_cycle
    if cycle.size == 0:
        raise RimInvariantError("State has an empty rim cycle")
    if cycle.size % 2 or np.any(cycle < 0) or np.any(cycle >= state.n_particles):
        raise RimInvariantError("Rim cycle indices are corrupted")
    return state.positions[cycle].copy()


def rim_separation(state: BagState) -> float:
    """Mean distance between corresponding front and back rim particles."""
    pairs = state.topology.rim_pairs
    delta = state.positions[pairs[:, 0]] - state.positions[pairs[:, 1]]
    return float(np.linalg.norm(delta, axis=1).mean())


def label_centroid(state: BagState, label: ParticleLabel) -> FloatArray:
    index = state.topology.indices_with_label(label)
    return state.positions[index].mean(axis=0)


def bag_centroid(state: BagState) -> FloatArray:
    return state.positions.mean(axis=0)


def lowest_height(state: BagState) -> float:
    return float(state.positions[:, 2].min())


def place_rigidly(
    state: BagState, angle: float, offset_xy: tuple[float, float]
) -> BagState:
    """
    Copy of the state rotated about its own xy centroid and shifted on the table.

    Heights are unchanged, so contact with the table is preserved.
    """
    placed = state.copy()
    centre = placed.positions[:, :2].mean(axis=0)
    c, s = math.cos(angle), math.sin(angle)
    rotation = np.array([[c, -s], [s, c]])
    xy = (placed.positions[:, :2] - centre) @ rotation.T + centre
    placed.positions[:, :2] = xy + np.asarray(offset_xy, dtype=np.float64)
    placed.velocities[:, :2] = placed.velocities[:, :2] @ rotation.T
    return placed
