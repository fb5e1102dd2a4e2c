"""
Rigid items dropped into the bag during insertion.

Items translate only (no rotation). Each item is either a sphere or an upright
cylinder. Items are stepped inside the bag's substep loop; free particles in
contact act as one body of their combined mass, pinned particles as walls.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from shakingbot_sim.bag_model.models import (
    TABLE_HEIGHT,
    FloatArray,
    IntArray,
    ItemShape,
    PhysicsParams,
)

CONTACT_ITERATIONS = 2


@dataclass(eq=False)
class ItemBody:
    shape: ItemShape
    radius: float
    height: float
    mass: float
    position: FloatArray
    velocity: FloatArray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        if self.radius <= 0 or self.mass <= 0:
            raise ValueError("Item radius and mass must be > 0")
        if self.shape is ItemShape.CYLINDER and self.height <= 0:
            raise ValueError("Cylinder height must be > 0")
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=np.float64).reshape(3)

    @property
    def half_height(self) -> float:
        if self.shape is ItemShape.SPHERE:
            return self.radius
        return self.height / 2.0

    @property
    def bottom(self) -> float:
        return float(self.position[2] - self.half_height)


def _contact_normals(
    item: ItemBody, points: FloatArray, margin: float
) -> tuple[np.ndarray, FloatArray, FloatArray]:
    """Return (penetrating mask, unit normals from item to particle, depths)."""
    rel = points - item.position
    if item.shape is ItemShape.SPHERE:
        dist = np.linalg.norm(rel, axis=1)
        depth = item.radius + margin - dist
        normal = rel / np.where(dist > 1e-12, dist, 1.0)[:, None]
        normal[dist <= 1e-12] = (0.0, 0.0, 1.0)
        return depth > 0, normal, depth

    radial = np.linalg.norm(rel[:, :2], axis=1)
    radial_depth = item.radius + margin - radial
    top_depth = item.half_height + margin - rel[:, 2]
    bottom_depth = item.half_height + margin + rel[:, 2]
    inside = (radial_depth > 0) & (top_depth > 0) & (bottom_depth > 0)
    depth = np.minimum(radial_depth, np.minimum(top_depth, bottom_depth))
    normal = np.zeros_like(rel)
    side = radial > 1e-12
    normal[side, :2] = rel[side, :2] / radial[side, None]
    use_top = top_depth <= np.minimum(radial_depth, bottom_depth)
    use_bottom = ~use_top & (bottom_depth <= radial_depth)
    normal[use_top] = (0.0, 0.0, 1.0)
    normal[use_bottom] = (0.0, 0.0, -1.0)
    normal[~side & ~use_top & ~use_bottom] = (1.0, 0.0, 0.0)
    return inside, normal, depth


def _resolve_free_contacts(
    item: ItemBody,
    x: FloatArray,
    v: FloatArray,
    index: IntArray,
    normal: FloatArray,
    depth: FloatArray,
    particle_mass: float,
) -> None:
    """
    Inelastic contact between the item and the free particles touching it.

    The particles act as one body of their combined mass: each loses its
    closing speed in the share M / (M + m_c), and the item takes the summed
    opposite impulse, so linear momentum is unchanged.
    """
    combined = particle_mass * len(index)
    particle_share = item.mass / (item.mass + combined)
    item_share = particle_mass / (item.mass + combined)

    rel_v = np.einsum("ij,ij->i", v[index] - item.velocity, normal)
    closing = np.minimum(rel_v, 0.0)
    v[index] -= normal * (closing * particle_share)[:, None]
    item.velocity += (normal * (closing * item_share)[:, None]).sum(axis=0)

    x[index] += normal * (depth * particle_share)[:, None]
    item.position -= (normal * (depth * item_share)[:, None]).sum(axis=0)


def _resolve_pinned_contacts(
    item: ItemBody,
    v: FloatArray,
    index: IntArray,
    normal: FloatArray,
    depth: FloatArray,
) -> None:
    """Pinned particles move with their gripper and push the item as walls."""
    for i, n in zip(index, normal):
        rel_v = float(np.dot(v[i] - item.velocity, n))
        if rel_v < 0.0:
            item.velocity += rel_v * n
    deepest = int(np.argmax(depth))
    item.position -= normal[deepest] * depth[deepest]


def _resolve_contacts(
    item: ItemBody,
    x: FloatArray,
    v: FloatArray,
    free: np.ndarray,
    particle_mass: float,
    margin: float,
) -> None:
    mask, normal, depth = _contact_normals(item, x, margin)
    if not mask.any():
        return
    index = np.flatnonzero(mask)
    normal, depth = normal[mask], depth[mask]
    movable = free[index]
    if movable.any():
        _resolve_free_contacts(
            item, x, v, index[movable], normal[movable], depth[movable], particle_mass
        )
    if not movable.all():
        held = ~movable
        _resolve_pinned_contacts(item, v, index[held], normal[held], depth[held])


def _table_contact(item: ItemBody, friction: float) -> None:
    floor = TABLE_HEIGHT + item.half_height
    if item.position[2] >= floor:
        return
    item.position[2] = floor
    normal_change = max(-float(item.velocity[2]), 0.0)
    item.velocity[2] = max(float(item.velocity[2]), 0.0)
    speed = float(np.linalg.norm(item.velocity[:2]))
    if speed > 1e-12:
        item.velocity[:2] *= 1.0 - min(1.0, friction * normal_change / speed)


def step_items(
    items: Sequence[ItemBody],
    x: FloatArray,
    v: FloatArray,
    free: np.ndarray,
    particle_mass: float,
    physics: PhysicsParams,
    h: float,
) -> None:
    """
    Advance items by one substep of length ``h`` and resolve their contact
    with the bag particles and the table.

    Items, positions ``x`` and velocities ``v`` are updated in place. ``free``
    marks the particles not held by a gripper.
    """
    for item in items:
        item.velocity[2] -= physics.gravity * h
        item.position += item.velocity * h
        for _ in range(CONTACT_ITERATIONS):
            _resolve_contacts(item, x, v, free, particle_mass, physics.particle_radius)
        _table_contact(item, physics.friction)
