"""
Trajectory generators for the action primitives.

Grippers hold the bag along the world x axis, left gripper at the smaller x.
Generators are pure: they take the current gripper pair and a command and
return a DualTrajectory; attaching is done by the caller, releases are
emitted as events.
"""

import logging
import math
from typing import Optional

import numpy as np
import structlog

from shakingbot_sim.bag_model.models import STRAIGHT_DOWN, GripperId
from shakingbot_sim.primitives.builder import TrajectoryBuilder
from shakingbot_sim.primitives.models import (
    BagAdjustment,
    DualArmShaking,
    DualTrajectory,
    EventKind,
    FloatArray,
    GripperPair,
    OneArmHolding,
    PrimitiveConfig,
    PrimitiveError,
    Recenter,
    Shake,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

# Wrist pitch at the top of the shaking stroke: 45 degrees above horizontal
APEX_PITCH = math.pi / 4
SYMMETRY_TOLERANCE = 0.01


def _config(config: Optional[PrimitiveConfig]) -> PrimitiveConfig:
    return config or PrimitiveConfig()


def _require_both(pair: GripperPair, name: str) -> None:
    if not pair.both_attached:
        raise PrimitiveError(f"{name} needs both grippers attached")


def _active_gripper(pair: GripperPair, name: str) -> GripperId:
    if pair.left_attached:
        return GripperId.LEFT
    if pair.right_attached:
        return GripperId.RIGHT
    raise PrimitiveError(f"{name} needs an attached gripper")


def _symmetric_targets(
    left: FloatArray, right: FloatArray, separation: float
) -> tuple[FloatArray, FloatArray]:
    mid_x = (left[0] + right[0]) / 2.0
    new_left, new_right = left.copy(), right.copy()
    new_left[0] = mid_x - separation / 2.0
    new_right[0] = mid_x + separation / 2.0
    return new_left, new_right


def gen_bag_adjustment(
    cmd: BagAdjustment, pair: GripperPair, config: Optional[PrimitiveConfig] = None
) -> DualTrajectory:
    """
    Narrow the gripper gap from d to d - delta_d, then swing the bag sideways.

    The gap change is skipped when d - delta_d would fall below d_min. The
    swing displaces both grippers along y by l * sin(2 pi f t) for k_s periods.

    Raises:
        PrimitiveError: If the grippers are not both attached and symmetric, or
            the swing would exceed the speed limit
    """
    cfg = _config(config)
    _require_both(pair, "BagAdjustment")
    if not pair.is_symmetric(SYMMETRY_TOLERANCE):
        raise PrimitiveError(
            "BagAdjustment needs gripper poses symmetric within "
            f"{SYMMETRY_TOLERANCE * 100:.0f} cm"
        )
    swing_speed = 2.0 * math.pi * cmd.f * cmd.l
    if swing_speed > cfg.v_max:
        raise PrimitiveError(
            f"Swing peak speed {swing_speed:.3f} m/s exceeds the limit of "
            f"{cfg.v_max:.3f} m/s"
        )

    builder = TrajectoryBuilder(pair, cfg)
    target = cmd.d - cmd.delta_d
    executed = cmd.delta_d > 0 and target >= cmd.d_min
    if executed:
        left, right = _symmetric_targets(builder.left, builder.right, target)
        builder.move_to(left, right, cfg.adjust_speed)
    else:
        structured_logger.debug(
            "Distance phase skipped", target=round(target, 4), d_min=cmd.d_min
        )

    base_left, base_right = builder.left, builder.right

    def swing(tau: float) -> tuple[FloatArray, FloatArray]:
        offset = cmd.l * math.sin(2.0 * math.pi * cmd.f * tau)
        left, right = base_left.copy(), base_right.copy()
        left[1] += offset
        right[1] += offset
        return left, right

    swing_start = builder.now
    builder.profile(cmd.k_s / cmd.f, swing)
    return builder.build(
        primitive="bag_adjustment",
        final_separation=target if executed else cmd.d,
        distance_phase_executed=executed,
        swing_start=swing_start,
    )


def gen_dual_arm_shaking(
    cmd: DualArmShaking, pair: GripperPair, config: Optional[PrimitiveConfig] = None
) -> DualTrajectory:
    """
    Fling the bag up to H and pull it down to H_prime, both at speed v.

    The wrist pitch turns linearly with path length from straight down to 45
    degrees above horizontal on the way up and back on the way down.

    Raises:
        PrimitiveError: If H exceeds the reach limit or the grippers are not
            both attached
    """
    cfg = _config(config)
    if cmd.H > cfg.reach:
        raise PrimitiveError(
            f"Shaking height {cmd.H:.3f} m exceeds the reach limit of "
            f"{cfg.reach:.3f} m"
        )
    if cmd.v > cfg.v_max:
        raise PrimitiveError(
            f"Shaking speed {cmd.v:.3f} m/s exceeds the limit of {cfg.v_max:.3f} m/s"
        )
    _require_both(pair, "DualArmShaking")

    builder = TrajectoryBuilder(pair, cfg)

    def stroke(z_end: float, pitch_end: float) -> None:
        starts = (builder.left, builder.right)
        span = max(abs(z_end - start[2]) for start in starts)
        duration = max(span / cmd.v, cfg.dt)

        def shape(tau: float) -> tuple[FloatArray, FloatArray]:
            frac = tau / duration
            rows = []
            for start in starts:
                row = start.copy()
                row[2] = start[2] + (z_end - start[2]) * frac
                row[3] = start[3] + (pitch_end - start[3]) * frac
                rows.append(row)
            return rows[0], rows[1]

        builder.profile(duration, shape)

    stroke(cmd.H, APEX_PITCH)
    apex_time = builder.now
    stroke(cmd.H_prime, STRAIGHT_DOWN)
    return builder.build(
        primitive="dual_arm_shaking",
        apex_z=cmd.H,
        apex_pitch=APEX_PITCH,
        apex_time=apex_time,
        final_z=cmd.H_prime,
    )


def gen_one_arm_holding(
    cmd: OneArmHolding, pair: GripperPair, config: Optional[PrimitiveConfig] = None
) -> DualTrajectory:
    """
    Lower both grippers to height h, release the right handle and park the
    right gripper at least park_distance away. The left gripper stays put.
    """
    cfg = _config(config)
    _require_both(pair, "OneArmHolding")
    builder = TrajectoryBuilder(pair, cfg)
    left, right = builder.left, builder.right
    left[2] = right[2] = cmd.h
    left[3] = right[3] = STRAIGHT_DOWN
    builder.move_to(left, right, cfg.hold_speed)
    descent_end = builder.now
    builder.event(EventKind.RELEASE, GripperId.RIGHT)
    parked = builder.right
    parked[0] += cfg.park_distance
    builder.move_to(right=parked, speed=cfg.move_speed)
    return builder.build(
        primitive="one_arm_holding", hold_height=cmd.h, descent_end=descent_end
    )


def gen_shake(
    cmd: Shake, pair: GripperPair, config: Optional[PrimitiveConfig] = None
) -> DualTrajectory:
    """
    Lift one grasp point to the shake height, rock the wrist ``cycles`` times
    by +/- amplitude, lower it again and release.

    Raises:
        PrimitiveError: If no gripper holds the bag
    """
    cfg = _config(config)
    active = _active_gripper(pair, "Shake")
    builder = TrajectoryBuilder(pair, cfg)
    index = 0 if active is GripperId.LEFT else 1

    def current() -> FloatArray:
        return builder.left if index == 0 else builder.right

    def move_active(row: FloatArray) -> None:
        if index == 0:
            builder.move_to(left=row)
        else:
            builder.move_to(right=row)

    start = current()
    lifted = start.copy()
    lifted[2] = max(start[2], cfg.shake_height)
    lifted[3] = STRAIGHT_DOWN
    move_active(lifted)

    other = builder.right if index == 0 else builder.left

    def rock(tau: float) -> tuple[FloatArray, FloatArray]:
        row = lifted.copy()
        row[3] = STRAIGHT_DOWN + cmd.amplitude * math.sin(
            2.0 * math.pi * tau / cfg.shake_period
        )
        return (row, other) if index == 0 else (other, row)

    rock_start = builder.now
    builder.profile(cmd.cycles * cfg.shake_period, rock)
    move_active(start)
    builder.event(EventKind.RELEASE, active)
    return builder.build(
        primitive="shake",
        gripper=active.value,
        rock_start=rock_start,
        rock_duration=cmd.cycles * cfg.shake_period,
    )


def gen_recenter(
    cmd: Recenter,
    bag_centroid: FloatArray,
    pair: GripperPair,
    config: Optional[PrimitiveConfig] = None,
) -> DualTrajectory:
    """
    Drag the bag by its grasp point so that its centroid moves onto the target.

    A centroid already within the recenter tolerance gives a single-sample
    trajectory without events.

    Raises:
        PrimitiveError: If the target lies outside the workspace or no gripper
            holds the bag
    """
    cfg = _config(config)
    half_x, half_y = cfg.workspace_half_extents
    tx, ty = cmd.target
    if abs(tx) > half_x or abs(ty) > half_y:
        raise PrimitiveError(
            f"Recenter target ({tx:.3f}, {ty:.3f}) is outside the "
            f"{2 * half_x:.2f} x {2 * half_y:.2f} m workspace"
        )
    builder = TrajectoryBuilder(pair, cfg)
    shift = np.array([tx, ty]) - np.asarray(bag_centroid, dtype=np.float64)[:2]
    if float(np.linalg.norm(shift)) <= cfg.recenter_tolerance:
        return builder.build(primitive="recenter", shift=[0.0, 0.0], noop=True)

    active = _active_gripper(pair, "Recenter")
    index = 0 if active is GripperId.LEFT else 1

    def move_active(delta: FloatArray) -> None:
        row = (builder.left if index == 0 else builder.right).copy()
        row[:3] += delta
        if index == 0:
            builder.move_to(left=row)
        else:
            builder.move_to(right=row)

    move_active(np.array([0.0, 0.0, cfg.recenter_lift]))
    move_active(np.array([shift[0], shift[1], 0.0]))
    move_active(np.array([0.0, 0.0, -cfg.recenter_lift]))
    builder.event(EventKind.RELEASE, active)
    return builder.build(
        primitive="recenter", shift=[float(shift[0]), float(shift[1])], noop=False
    )


def gen_dual_lift(
    pair: GripperPair,
    height: float,
    separation: float,
    config: Optional[PrimitiveConfig] = None,
) -> DualTrajectory:
    """
    Raise both grasped handles to ``height``, then line them up along x at
    ``separation`` about their midpoint, leaving the pair symmetric.
    """
    cfg = _config(config)
    _require_both(pair, "Dual lift")
    if height > cfg.reach:
        raise PrimitiveError(
            f"Lift height {height:.3f} m exceeds the reach limit of {cfg.reach:.3f} m"
        )
    builder = TrajectoryBuilder(pair, cfg)
    left, right = builder.left, builder.right
    left[2] = right[2] = height
    left[3] = right[3] = STRAIGHT_DOWN
    builder.move_to(left, right)
    mid_y = (left[1] + right[1]) / 2.0
    left[1] = right[1] = mid_y
    left, right = _symmetric_targets(left, right, separation)
    builder.move_to(left, right)
    return builder.build(primitive="dual_lift", height=height, separation=separation)


def gen_lift(
    pair: GripperPair,
    dz: float,
    hold_time: float = 0.0,
    config: Optional[PrimitiveConfig] = None,
) -> DualTrajectory:
    """Raise every attached gripper by ``dz`` and hold for ``hold_time`` seconds."""
    cfg = _config(config)
    _active_gripper(pair, "Lift")
    builder = TrajectoryBuilder(pair, cfg)
    left, right = builder.left, builder.right
    if pair.left_attached:
        left[2] += dz
    if pair.right_attached:
        right[2] += dz
    if max(left[2], right[2]) > cfg.reach:
        raise PrimitiveError(f"Lift exceeds the reach limit of {cfg.reach:.3f} m")
    builder.move_to(left, right)
    builder.hold(hold_time)
    return builder.build(primitive="lift", dz=dz, hold_time=hold_time)


def gen_hold(
    pair: GripperPair, duration: float, config: Optional[PrimitiveConfig] = None
) -> DualTrajectory:
    """Keep both grippers still for ``duration`` seconds."""
    return TrajectoryBuilder(pair, _config(config)).hold(duration).build(
        primitive="hold"
    )
