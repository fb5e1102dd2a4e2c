"""
Time integration of the bag: springs, damping, gravity, drag, table contact
and kinematic gripper pins.
"""

import logging
import math
from typing import Collection, Mapping, Optional, Sequence

import numpy as np
import structlog

from shakingbot_sim.bag_model.builder import stable_substep
from shakingbot_sim.bag_model.items import ItemBody, step_items
from shakingbot_sim.bag_model.models import (
    STRAIGHT_DOWN,
    TABLE_HEIGHT,
    AttachmentError,
    BagState,
    BagTopology,
    FloatArray,
    GraspMissError,
    GripperAttachment,
    GripperId,
    PhysicsParams,
    Pose,
    SettleResult,
    SimulationDivergedError,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

MAX_DT = 1.0 / 60.0
DEFAULT_DT = 1.0 / 240.0
DIVERGENCE_LIMIT = 1.0e3


def pitch_rotation(pitch: float) -> FloatArray:
    """Rotation about the world x axis; identity at STRAIGHT_DOWN."""
    angle = pitch - STRAIGHT_DOWN
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def pinned_targets(attachment: GripperAttachment, pose: Pose) -> FloatArray:
    """World positions of the pinned particles for a gripper pose."""
    return pose.position + attachment.local_offsets @ pitch_rotation(pose.pitch).T


def _lerp_pose(start: Pose, end: Pose, frac: float) -> Pose:
    return Pose(*(a + (b - a) * frac for a, b in zip(start, end)))


def _scatter(n: int, index: np.ndarray, values: FloatArray) -> FloatArray:
    out = np.empty((n, 3))
    for axis in range(3):
        out[:, axis] = np.bincount(index, values[:, axis], n)
    return out


def _spring_forces(topo: BagTopology, x: FloatArray) -> FloatArray:
    delta = x[topo.spring_j] - x[topo.spring_i]
    length = np.linalg.norm(delta, axis=1)
    safe = np.where(length > 1e-12, length, 1.0)
    magnitude = topo.spring_k * (length - topo.spring_rest) / safe
    force = delta * magnitude[:, None]
    n = topo.n_particles
    return _scatter(n, topo.spring_i, force) - _scatter(n, topo.spring_j, force)


def _drag_forces(
    topo: BagTopology, x: FloatArray, v: FloatArray, drag_coeff: float
) -> FloatArray:
    """Per-triangle normal drag -c_d * A * (v.n) n, shared equally by the vertices."""
    tri = topo.triangles
    p0, p1, p2 = x[tri[:, 0]], x[tri[:, 1]], x[tri[:, 2]]
    normal = np.cross(p1 - p0, p2 - p0)
    norm = np.linalg.norm(normal, axis=1)
    v_mean = (v[tri[:, 0]] + v[tri[:, 1]] + v[tri[:, 2]]) / 3.0
    v_normal = np.einsum("ij,ij->i", v_mean, normal)
    safe_norm = np.maximum(norm, 1e-12)
    scale = np.where(norm > 1e-12, -drag_coeff * v_normal / (2.0 * safe_norm), 0.0)
    per_vertex = normal * (scale / 3.0)[:, None]
    n = topo.n_particles
    return (
        _scatter(n, tri[:, 0], per_vertex)
        + _scatter(n, tri[:, 1], per_vertex)
        + _scatter(n, tri[:, 2], per_vertex)
    )


def _damp_springs(topo: BagTopology, x: FloatArray, v: FloatArray, h: float) -> None:
    """
    Axial spring damping as an implicit, Jacobi-averaged velocity impulse.

    Each spring removes a share of its relative axial velocity; equal and
    opposite impulses keep linear momentum unchanged.
    """
    damping = topo.spec.damping
    delta = x[topo.spring_j] - x[topo.spring_i]
    length = np.linalg.norm(delta, axis=1)
    direction = delta / np.where(length > 1e-12, length, 1.0)[:, None]
    v_rel = np.einsum("ij,ij->i", v[topo.spring_j] - v[topo.spring_i], direction)
    alpha = 2.0 * damping * h / topo.particle_mass
    share = alpha / (1.0 + alpha) / topo.max_incident_springs
    impulse = direction * (0.5 * share * v_rel)[:, None]
    n = topo.n_particles
    v += _scatter(n, topo.spring_i, impulse) - _scatter(n, topo.spring_j, impulse)


def _table_contact(
    x: FloatArray, v: FloatArray, free: np.ndarray, physics: PhysicsParams
) -> None:
    floor = TABLE_HEIGHT + physics.particle_radius
    below = free & (x[:, 2] < floor)
    if not below.any():
        return
    x[below, 2] = floor
    vz = v[below, 2]
    normal_change = np.maximum(-vz, 0.0)
    v[below, 2] = np.maximum(vz, 0.0)
    tangential = v[below, :2]
    speed = np.linalg.norm(tangential, axis=1)
    reduction = np.where(
        speed > 1e-12,
        np.minimum(1.0, physics.friction * normal_change / np.maximum(speed, 1e-12)),
        0.0,
    )
    v[below, :2] = tangential * (1.0 - reduction)[:, None]


def _check_finite(x: FloatArray, v: FloatArray, step_count: int) -> None:
    if not (np.isfinite(x).all() and np.isfinite(v).all()):
        raise SimulationDivergedError(step_count)
    if np.abs(x).max() > DIVERGENCE_LIMIT:
        raise SimulationDivergedError(step_count, "position beyond 1 km")


def _check_items_finite(items: Sequence[ItemBody], step_count: int) -> None:
    for item in items:
        if not (np.isfinite(item.position).all() and np.isfinite(item.velocity).all()):
            raise SimulationDivergedError(step_count, "non-finite item state")


def _check_penetration(
    x: FloatArray, physics: PhysicsParams, step_count: int
) -> None:
    depth = TABLE_HEIGHT - float(x[:, 2].min())
    if depth > physics.penetration_tolerance:
        raise SimulationDivergedError(
            step_count, f"particle {depth * 1000:.1f} mm below the table"
        )


def _check_stretch(state: BagState, x: FloatArray) -> bool:
    topo = state.topology
    length = np.linalg.norm(x[topo.spring_j] - x[topo.spring_i], axis=1)
    ratio = float((length / topo.spring_rest).max())
    if ratio <= state.physics.max_stretch_ratio or state.overstretch_warned:
        return state.overstretch_warned
    logger.warning(
        f"Spring stretched to {ratio:.2f}x rest length at t={state.time:.3f}s"
    )
    structured_logger.warning(
        "Spring overstretch",
        ratio=round(ratio, 3),
        time=round(state.time, 4),
        step_count=state.step_count,
    )
    return True


def step(
    state: BagState,
    attachments: Collection[GripperAttachment],
    gripper_poses: Mapping[GripperId, Pose],
    dt: float,
    items: Sequence[ItemBody] = (),
) -> BagState:
    """
    Advance the bag by ``dt`` seconds with semi-implicit Euler substeps.

    Pinned particles follow their gripper, whose pose is interpolated from the
    last commanded pose to ``gripper_poses`` across the substeps. ``items`` are
    stepped in place within the same substeps, after the particles move.

    Raises:
        ValueError: If dt is outside (0, 1/60] or a pose is not finite
        AttachmentError: If an attachment has no known gripper pose
        SimulationDivergedError: If any position or velocity becomes non-finite
    """
    if not 0.0 < dt <= MAX_DT + 1e-12:
        raise ValueError(f"dt must lie in (0, {MAX_DT:.5f}], got {dt}")
    for gripper_id, pose in gripper_poses.items():
        if not pose.is_finite():
            raise ValueError(f"Pose of gripper {gripper_id.value} is not finite")

    topo = state.topology
    physics = state.physics
    n = topo.n_particles
    x = state.positions.copy()
    v = state.velocities.copy()

    pins: list[tuple[GripperAttachment, np.ndarray, Pose, Pose]] = []
    free = np.ones(n, dtype=bool)
    for attachment in attachments:
        gid = attachment.gripper_id
        end = gripper_poses.get(gid, state.gripper_poses.get(gid))
        if end is None:
            raise AttachmentError(f"No pose known for gripper {gid.value}")
        start = state.gripper_poses.get(gid, end)
        index = np.asarray(attachment.pinned, dtype=np.int64)
        free[index] = False
        pins.append((attachment, index, start, end))

    n_sub = max(1, math.ceil(dt / stable_substep(topo) - 1e-9))
    h = dt / n_sub
    inv_mass = 1.0 / topo.particle_mass
    gravity = np.array([0.0, 0.0, -physics.gravity])
    drag_coeff = state.drag_coeff

    for sub in range(1, n_sub + 1):
        force = _spring_forces(topo, x)
        if drag_coeff > 0.0:
            force += _drag_forces(topo, x, v, drag_coeff)
        v += h * (force * inv_mass + gravity)
        _damp_springs(topo, x, v, h)
        previous = x.copy()
        x += h * v
        frac = sub / n_sub
        for attachment, index, start, end in pins:
            target = pinned_targets(attachment, _lerp_pose(start, end, frac))
            v[index] = (target - previous[index]) / h
            x[index] = target
        if items:
            step_items(items, x, v, free, topo.particle_mass, physics, h)
        _table_contact(x, v, free, physics)

    _check_finite(x, v, state.step_count + 1)
    _check_items_finite(items, state.step_count + 1)
    _check_penetration(x, physics, state.step_count + 1)
    poses = dict(state.gripper_poses)
    poses.update(gripper_poses)
    return BagState(
        topology=topo,
        positions=x,
        velocities=v,
        physics=physics,
        time=state.time + dt,
        step_count=state.step_count + 1,
        attachments=dict(state.attachments),
        gripper_poses=poses,
        overstretch_warned=_check_stretch(state, x),
    )


def advance(
    state: BagState,
    gripper_poses: Optional[Mapping[GripperId, Pose]] = None,
    dt: float = DEFAULT_DT,
) -> BagState:
    """step() with the state's own active attachments."""
    return step(
        state,
        list(state.attachments.values()),
        gripper_poses if gripper_poses is not None else {},
        dt,
    )


def attach(
    state: BagState,
    gripper_id: GripperId,
    grasp_point: FloatArray,
    radius: float,
) -> GripperAttachment:
    """
    Pin every particle within ``radius`` of the grasp point to a gripper.

    The grasp height is clamped to the table surface. Particles already held by
    the other gripper are not candidates. The attachment is registered on the
    state and the gripper pose is set to the grasp point, pointing down.

    Raises:
        AttachmentError: If radius <= 0 or the gripper is already attached
        GraspMissError: If no free particle lies within radius
    """
    if not radius > 0:
        raise AttachmentError(f"Grasp radius must be > 0, got {radius}")
    if gripper_id in state.attachments:
        raise AttachmentError(f"Gripper {gripper_id.value} is already attached")
    point = np.asarray(grasp_point, dtype=np.float64).reshape(3).copy()
    point[2] = max(point[2], TABLE_HEIGHT)

    distance = np.linalg.norm(state.positions - point, axis=1)
    candidates = distance <= radius
    taken = list(state.pinned_indices())
    if taken:
        candidates[taken] = False
    pinned = np.flatnonzero(candidates)
    if pinned.size == 0:
        raise GraspMissError(
            f"No free particle within {radius:.3f} m of "
            f"({point[0]:.3f}, {point[1]:.3f}, {point[2]:.3f})"
        )

    pose = Pose(float(point[0]), float(point[1]), float(point[2]), STRAIGHT_DOWN)
    attachment = GripperAttachment(
        gripper_id=gripper_id,
        pinned=tuple(int(i) for i in pinned),
        local_offsets=state.positions[pinned] - point,
    )
    state.attachments[gripper_id] = attachment
    state.gripper_poses[gripper_id] = pose
    structured_logger.debug(
        "Gripper attached",
        gripper=gripper_id.value,
        pinned=len(attachment.pinned),
        point=[round(float(c), 4) for c in point],
    )
    return attachment


def release(state: BagState, attachment: GripperAttachment) -> None:
    """
    Free the pinned particles; they keep their current velocities.

    Raises:
        AttachmentError: If the attachment is not the active one for its gripper
    """
    active = state.attachments.get(attachment.gripper_id)
    if active is not attachment:
        raise AttachmentError(
            f"Attachment for gripper {attachment.gripper_id.value} is not active"
        )
    del state.attachments[attachment.gripper_id]
    structured_logger.debug(
        "Gripper released",
        gripper=attachment.gripper_id.value,
        pinned=len(attachment.pinned),
    )


def settle(
    state: BagState,
    attachments: Optional[Collection[GripperAttachment]] = None,
    gripper_poses: Optional[Mapping[GripperId, Pose]] = None,
    max_time: float = 3.0,
    ke_eps: Optional[float] = None,
    dt: float = DEFAULT_DT,
) -> SettleResult:
    """
    Step with grippers held still until kinetic energy drops below ``ke_eps``
    or ``max_time`` elapses. Kinetic energy is checked before each step.
    """
    if not max_time > 0:
        raise ValueError(f"max_time must be > 0, got {max_time}")
    eps = state.physics.ke_eps if ke_eps is None else ke_eps
    if attachments is None:
        held = list(state.attachments.values())
    else:
        held = list(attachments)
    poses = dict(state.gripper_poses if gripper_poses is None else gripper_poses)

    elapsed = 0.0
    current = state
    while True:
        if current.kinetic_energy() < eps:
            return SettleResult(current, True, "kinetic_energy_below_eps", elapsed)
        if elapsed >= max_time - 1e-12:
            return SettleResult(current, False, "timeout", elapsed)
        current = step(current, held, poses, dt)
        elapsed += dt
