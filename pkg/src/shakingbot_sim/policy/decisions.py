"""
Rule policy over segmentation masks and opening metrics.

``decide`` picks the next primitive commands for the current phase and charges
them to the action budget; executing them and moving the phase is left to the
controller.
"""

import logging
from typing import Optional

import numpy as np
import structlog

from shakingbot_sim.bag_model.models import TABLE_HEIGHT
from shakingbot_sim.metrics.opening import opening_ok
from shakingbot_sim.perception.analytic import grasp_points
from shakingbot_sim.perception.models import DetectionStatus, Masks, Observation
from shakingbot_sim.primitives.models import (
    GripperPair,
    PrimitiveCommand,
    PrimitiveConfig,
    Recenter,
    Shake,
)
from shakingbot_sim.policy.models import (
    BottomSensing,
    Decision,
    DualGrasp,
    Phase,
    PolicyCommand,
    PolicyConfig,
    PolicyState,
    PolicyVariant,
)
from shakingbot_sim.policy.sensing import (
    bag_bottom_height,
    grasp_point_3d,
    nearest_support_pixel,
    support_centroid,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

WORKSPACE_CENTER = (0.0, 0.0)
# Lowest gripper height One-arm Holding may descend to
MIN_HOLD_HEIGHT = 0.05
# DualArmShaking needs its stroke top above the final height
STROKE_MARGIN = 0.05


def _charge(ps: PolicyState, decision: Decision) -> Decision:
    ps.use_actions(len(decision.commands))
    return decision


def _forced(ps: PolicyState, next_phase: Phase, reason: str) -> Decision:
    ps.forced = True
    structured_logger.warning(
        "Policy forced on",
        reason=reason,
        phase=ps.phase.value,
        actions_used=ps.actions_used,
        budget=ps.budget,
        next_phase=next_phase.value,
    )
    return Decision((), next_phase, reason, forced=True)


def shaking_height(
    pair: GripperPair,
    bottom: BottomSensing,
    config: PolicyConfig,
    primitive_config: PrimitiveConfig,
) -> float:
    """Final gripper height of a shaking stroke that keeps the bag off the table."""
    grip_z = float(min(pair.left.z, pair.right.z))
    hang = grip_z - bottom.height if bottom.sensed else grip_z - TABLE_HEIGHT
    h_prime = max(config.min_h_prime, hang + config.h_prime_clearance)
    return min(h_prime, primitive_config.shaking_height - STROKE_MARGIN)


def holding_height(
    pair: GripperPair, bottom: BottomSensing, config: PolicyConfig
) -> float:
    """
    Gripper height at which the bag bottom just touches the table.

    Falls back to the conservative pre-set height when the bottom was not
    sensed.
    """
    if not bottom.sensed:
        return config.fallback_hold_height
    grip_z = float(min(pair.left.z, pair.right.z))
    return max(grip_z - (bottom.height - TABLE_HEIGHT), MIN_HOLD_HEIGHT)


def _single_grasp_point(
    obs: Observation, masks: Masks
) -> Optional[tuple[float, float, float]]:
    detection = grasp_points(masks)
    if detection.points:
        return grasp_point_3d(obs, detection.points[0])
    centroid = support_centroid(obs)
    if centroid is None:
        return None
    pixel = nearest_support_pixel(obs, centroid)
    return None if pixel is None else grasp_point_3d(obs, pixel)


def _decide_grasp(
    obs: Observation, masks: Masks, ps: PolicyState, config: PolicyConfig
) -> Decision:
    if ps.exhausted:
        return _forced(ps, Phase.LIFT, "budget exhausted before grasping")

    detection = grasp_points(masks)
    if detection.status is DetectionStatus.BOTH:
        first, second = sorted(
            (grasp_point_3d(obs, uv) for uv in detection.points), key=lambda p: p[0]
        )
        grasp = DualGrasp(first, second)
        return _charge(ps, Decision((grasp,), Phase.GRASP, "both handles visible"))

    grasp_point = _single_grasp_point(obs, masks)
    if grasp_point is None:
        return _forced(ps, Phase.LIFT, "no bag visible")
    centroid = support_centroid(obs)
    assert centroid is not None
    offset = float(np.hypot(*(centroid - np.asarray(WORKSPACE_CENTER))))
    command: PrimitiveCommand
    if offset > config.r_center:
        command = Recenter(target=WORKSPACE_CENTER)
        reason = f"bag centroid {offset:.3f} m off centre"
    else:
        command = Shake(
            grasp_point=(grasp_point[0], grasp_point[1]),
            amplitude=config.shake_amplitude,
            cycles=config.shake_cycles,
        )
        reason = f"{detection.status.value} handle(s) visible"
    return _charge(ps, Decision((command,), Phase.PERCEIVE, reason, grasp_point))


def _decide_open(
    obs: Observation,
    ps: PolicyState,
    pair: GripperPair,
    config: PolicyConfig,
    primitive_config: PrimitiveConfig,
    variant: PolicyVariant,
) -> Decision:
    if ps.last_metrics is not None and opening_ok(ps.last_metrics, config.thresholds):
        ps.opened = True
        return Decision((), Phase.HOLD, "opening reached the thresholds")
    if ps.exhausted:
        return _forced(ps, Phase.HOLD, "budget exhausted while opening")

    bottom = bag_bottom_height(
        obs, pair.midpoint, config.bottom_window_px, TABLE_HEIGHT
    )
    commands: list[PolicyCommand] = []
    if variant.use_bag_adjustment:
        commands.append(primitive_config.bag_adjustment(pair.separation))
    commands.append(
        primitive_config.dual_arm_shaking(
            shaking_height(pair, bottom, config, primitive_config)
        )
    )
    commands = commands[: ps.remaining]
    return _charge(ps, Decision(tuple(commands), Phase.OPEN, "opening too small"))


def decide(
    obs: Observation,
    masks: Masks,
    ps: PolicyState,
    pair: GripperPair,
    config: Optional[PolicyConfig] = None,
    primitive_config: Optional[PrimitiveConfig] = None,
    variant: Optional[PolicyVariant] = None,
) -> Decision:
    """
    Choose the next commands for the perceive, grasp and open phases.

    Every emitted command is charged to ``ps``; at an exhausted budget the
    decision is a forced move on (to LIFT before grasping, to HOLD while
    opening).

    Args:
        obs: Current top-down observation
        masks: Segmentation of ``obs``
        ps: Policy state, updated in place
        pair: Current gripper poses and attachment flags
        config: Policy thresholds
        primitive_config: Pre-set primitive parameters
        variant: Ablation switches

    Returns:
        The decision, with the phase to enter after executing it

    Raises:
        ValueError: If called in a phase that does not decide
    """
    config = config or PolicyConfig()
    primitive_config = primitive_config or PrimitiveConfig()
    variant = variant or PolicyVariant()
    if ps.phase in (Phase.PERCEIVE, Phase.GRASP):
        decision = _decide_grasp(obs, masks, ps, config)
    elif ps.phase is Phase.OPEN:
        decision = _decide_open(obs, ps, pair, config, primitive_config, variant)
    else:
        raise ValueError(f"decide() is not defined in phase {ps.phase.value}")
    structured_logger.debug(
        "Policy decision", phase=ps.phase.value, **decision.to_dict()
    )
    return decision
