"""
Construction of the two-layer vest-bag mesh.

The bag is two rectangular lattices (front layer on top) joined by seam
springs on the left, right and bottom edges, open along the top row. Two
handle tabs extend above the top row at the outer columns; their outer edges
and top rows are seamed too, leaving the inner edge open as the handle loop.
"""

import logging
import math
from typing import Optional

import numpy as np
import structlog

from shakingbot_sim.bag_model.models import (
    BagSpec,
    BagState,
    BagTopology,
    FloatArray,
    IntArray,
    PaintRegion,
    ParticleLabel,
    PhysicsParams,
    SpringKind,
)
from shakingbot_sim.log_utils import log_function_call

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

FRONT_LAYER = 0
BACK_LAYER = 1
RIM_BAND_WIDTH = 0.025
JITTER_XY = 0.0005
JITTER_Z = 0.0003
MIN_ROWS = 4

# (di, dj, kind) neighbour offsets inside one layer
_LAYER_NEIGHBOURS: tuple[tuple[int, int, SpringKind], ...] = (
    (1, 0, SpringKind.STRUCTURAL),
    (0, 1, SpringKind.STRUCTURAL),
    (1, 1, SpringKind.SHEAR),
    (-1, 1, SpringKind.SHEAR),
    (2, 0, SpringKind.BEND),
    (0, 2, SpringKind.BEND),
)


def lattice_shape(spec: BagSpec) -> tuple[int, int, int, int]:
    """Return (nx, ny, tab_cols, tab_rows) for a spec."""
    nx = spec.resolution
    ny = max(MIN_ROWS, int(round(nx * spec.height / spec.width)))
    dx = spec.width / (nx - 1)
    dy = spec.height / (ny - 1)
    tab_cols = int(round(spec.handle_width / dx)) + 1
    tab_cols = max(2, min(tab_cols, nx // 2 - 1))
    tab_rows = max(1, int(round(spec.handle_height / dy)))
    return nx, ny, tab_cols, tab_rows


def _node_map(nx: int, ny: int, tab_cols: int, tab_rows: int) -> IntArray:
    """Index of each (layer, row, column) node, -1 where the lattice has no node."""
    node = np.full((2, ny + tab_rows, nx), -1, dtype=np.int64)
    tab_columns = set(range(tab_cols)) | set(range(nx - tab_cols, nx))
    index = 0
    for layer in (FRONT_LAYER, BACK_LAYER):
        for j in range(ny + tab_rows):
            for i in range(nx):
                if j < ny or i in tab_columns:
                    node[layer, j, i] = index
                    index += 1
    return node


def _is_seam(i: int, j: int, nx: int, ny: int, tab_rows: int) -> bool:
    if j >= ny:
        return i in (0, nx - 1) or j == ny + tab_rows - 1
    return i in (0, nx - 1) or j == 0


def _incident_totals(
    n: int, spring_i: IntArray, spring_j: IntArray, spring_k: FloatArray
) -> tuple[float, int]:
    stiffness = np.bincount(spring_i, spring_k, n) + np.bincount(spring_j, spring_k, n)
    counts = np.bincount(spring_i, minlength=n) + np.bincount(spring_j, minlength=n)
    return float(stiffness.max()), int(counts.max())


@log_function_call
def new_bag(
    spec: BagSpec, seed: int, physics: Optional[PhysicsParams] = None
) -> BagState:
    """
    Build a flat bag lying on the table.

    Positions carry a seeded sub-millimetre jitter and every rest length is
    measured on the jittered positions, so the returned state is an exact
    equilibrium when gravity is switched off.

    Args:
        spec: Bag dimensions and material constants
        seed: Seed for the construction jitter
        physics: Simulation constants; defaults to PhysicsParams()

    Returns:
        A BagState at rest with time 0

    Raises:
        InvalidBagSpecError: If the spec violates its invariants
    """
    spec.validate()
    physics = physics or PhysicsParams()
    if not spec.is_standard_size:
        logger.info(
            f"Bag spec {spec.width:.3f} x {spec.height:.3f} m is outside the "
            "25-35 cm by 40-53 cm range"
        )
        structured_logger.info(
            "Non-conformant bag spec", width=spec.width, height=spec.height
        )

    nx, ny, tab_cols, tab_rows = lattice_shape(spec)
    dx = spec.width / (nx - 1)
    dy = spec.height / (ny - 1)
    node = _node_map(nx, ny, tab_cols, tab_rows)
    n = int(node.max()) + 1
    radius = physics.particle_radius

    grid = np.zeros((n, 2), dtype=np.int64)
    layers = np.zeros(n, dtype=np.int64)
    positions = np.zeros((n, 3), dtype=np.float64)
    for layer, j, i in zip(*np.nonzero(node >= 0)):
        idx = node[layer, j, i]
        grid[idx] = (i, j)
        layers[idx] = layer
        positions[idx] = (
            -spec.width / 2 + i * dx,
            -spec.height / 2 + j * dy,
            3 * radius if layer == FRONT_LAYER else radius,
        )

    rng = np.random.default_rng(seed)
    positions[:, :2] += rng.uniform(-JITTER_XY, JITTER_XY, size=(n, 2))
    positions[:, 2] += rng.uniform(0.0, JITTER_Z, size=n)

    cols, rows = grid[:, 0], grid[:, 1]
    labels = np.full(n, int(ParticleLabel.BODY), dtype=np.int64)
    labels[rows == ny - 1] = int(ParticleLabel.RIM)
    tab = rows >= ny
    labels[tab & (cols < nx / 2)] = int(ParticleLabel.HANDLE_L)
    labels[tab & (cols >= nx / 2)] = int(ParticleLabel.HANDLE_R)

    band_rows = max(1, int(round(RIM_BAND_WIDTH / dy)))
    paint = np.full(n, int(PaintRegion.BASE), dtype=np.int64)
    paint[(rows >= ny - 1 - band_rows) & ~tab] = int(PaintRegion.RIM_BAND)
    paint[tab] = int(PaintRegion.HANDLE)

    stiffness = {
        SpringKind.STRUCTURAL: spec.stiffness_structural,
        SpringKind.SHEAR: spec.stiffness_shear,
        SpringKind.BEND: spec.stiffness_bend,
        SpringKind.SEAM: spec.stiffness_structural,
    }
    pairs: list[tuple[int, int, SpringKind]] = []
    triangles: list[tuple[int, int, int]] = []
    height_rows = ny + tab_rows
    for layer in (FRONT_LAYER, BACK_LAYER):
        for j in range(height_rows):
            for i in range(nx):
                a = node[layer, j, i]
                if a < 0:
                    continue
                for di, dj, kind in _LAYER_NEIGHBOURS:
                    ii, jj = i + di, j + dj
                    if 0 <= ii < nx and jj < height_rows and node[layer, jj, ii] >= 0:
                        pairs.append((a, node[layer, jj, ii], kind))
                if i + 1 < nx and j + 1 < height_rows:
                    b = node[layer, j, i + 1]
                    c = node[layer, j + 1, i]
                    d = node[layer, j + 1, i + 1]
                    if min(b, c, d) >= 0:
                        triangles.append((a, b, d))
                        triangles.append((a, d, c))
    for j in range(height_rows):
        for i in range(nx):
            front = node[FRONT_LAYER, j, i]
            if front >= 0 and _is_seam(i, j, nx, ny, tab_rows):
                pairs.append((front, node[BACK_LAYER, j, i], SpringKind.SEAM))

    spring_i = np.array([p[0] for p in pairs], dtype=np.int64)
    spring_j = np.array([p[1] for p in pairs], dtype=np.int64)
    spring_kind = np.array([int(p[2]) for p in pairs], dtype=np.int64)
    spring_k = np.array([stiffness[p[2]] for p in pairs], dtype=np.float64)
    spring_rest = np.linalg.norm(positions[spring_j] - positions[spring_i], axis=1)

    front_rim = node[FRONT_LAYER, ny - 1, :]
    back_rim = node[BACK_LAYER, ny - 1, :]
    rim_cycle = np.concatenate([front_rim, back_rim[::-1]])
    rim_pairs = np.stack([front_rim, back_rim], axis=1)
    rim_closed = positions[np.roll(rim_cycle, -1)] - positions[rim_cycle]
    rim_perimeter_rest = float(np.linalg.norm(rim_closed, axis=1).sum())

    max_stiffness, max_springs = _incident_totals(n, spring_i, spring_j, spring_k)
    topology = BagTopology(
        spec=spec,
        seed=seed,
        nx=nx,
        ny=ny,
        tab_rows=tab_rows,
        tab_cols=tab_cols,
        labels=labels,
        layers=layers,
        paint=paint,
        grid=grid,
        spring_i=spring_i,
        spring_j=spring_j,
        spring_rest=spring_rest,
        spring_kind=spring_kind,
        spring_k=spring_k,
        triangles=np.array(triangles, dtype=np.int64),
        rim_cycle=rim_cycle,
        rim_pairs=rim_pairs,
        particle_mass=spec.mass_total / n,
        max_incident_stiffness=max_stiffness,
        max_incident_springs=max_springs,
        rim_perimeter_rest=rim_perimeter_rest,
        rest_positions=positions.copy(),
    )
    structured_logger.debug(
        "Bag built",
        particles=n,
        springs=len(pairs),
        triangles=len(triangles),
        grid=[nx, ny],
        tabs=[tab_cols, tab_rows],
        seed=seed,
    )
    return BagState(
        topology=topology,
        positions=positions,
        velocities=np.zeros_like(positions),
        physics=physics,
    )


def stable_substep(topology: BagTopology) -> float:
    """Largest explicit substep for the stiffest particle, with a 10% margin."""
    omega = math.sqrt(2.0 * topology.max_incident_stiffness / topology.particle_mass)
    return 1.8 / omega
