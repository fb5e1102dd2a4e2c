"""
Paired mechanism experiments and the generalisation sweep.
"""

import logging
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np
import structlog

from shakingbot_sim.bag_model import (
    BagSpec,
    BagState,
    GripperId,
    ParticleLabel,
    new_bag,
    rim_points,
    rim_separation,
)
from shakingbot_sim.harness.models import (
    MechanismResult,
    ResultRow,
    TrialConfig,
)
from shakingbot_sim.harness.reporting import aggregate
from shakingbot_sim.harness.runners import TrialRunner, run_trial
from shakingbot_sim.harness.tiers import perturb
from shakingbot_sim.log_utils import log_function_call
from shakingbot_sim.metrics import opening_metrics
from shakingbot_sim.policy import PolicyConfig, Scene, execute_trajectory
from shakingbot_sim.primitives import (
    DualArmShaking,
    PrimitiveConfig,
    gen_bag_adjustment,
    gen_dual_arm_shaking,
    gen_dual_lift,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

DEFAULT_SEEDS = tuple(range(16))
SLOW_SHAKING_SPEED = 0.05
# Starting bags are crumpled like tier 2, without its predicate check
START_TIER = 2
GENERALIZATION_TRIALS = 3
# Flat width and height in m, larger than the default bag
UNSEEN_SIZE = (0.35, 0.53)
RED_BODY = (200, 30, 30)


def _grasp_handles(scene: Scene) -> None:
    """Grasp each handle at its particle nearest to the handle's centroid."""
    positions = scene.state.positions
    for gripper_id, label in (
        (GripperId.LEFT, ParticleLabel.HANDLE_L),
        (GripperId.RIGHT, ParticleLabel.HANDLE_R),
    ):
        indices = scene.state.topology.indices_with_label(label)
        centre = positions[indices].mean(axis=0)
        distances = np.linalg.norm(positions[indices] - centre, axis=1)
        nearest = indices[np.argmin(distances)]
        x, y, z = positions[nearest]
        scene.grasp(gripper_id, (float(x), float(y), float(z)))


def held_scene(
    spec: BagSpec,
    seed: int,
    policy_config: Optional[PolicyConfig] = None,
    primitive_config: Optional[PrimitiveConfig] = None,
) -> Scene:
    """A crumpled bag grasped by both handles and carried to the shaking pose."""
    policy_config = policy_config or PolicyConfig()
    primitive_config = primitive_config or PrimitiveConfig()
    state = perturb(new_bag(spec, seed), START_TIER, seed)
    scene = Scene(
        state,
        primitive_config=primitive_config,
        grasp_radius=policy_config.grasp_radius,
    )
    _grasp_handles(scene)
    execute_trajectory(
        scene,
        gen_dual_lift(
            scene.pair,
            policy_config.grasp_lift_height,
            policy_config.grasp_separation,
            primitive_config,
        ),
    )
    scene.settle(policy_config.settle_time)
    return scene


def _fork(scene: Scene) -> Scene:
    return Scene(
        scene.state.copy(),
        primitive_config=scene.primitive_config,
        grasp_radius=scene.grasp_radius,
    )


def _a_ch(state: BagState) -> float:
    return opening_metrics(rim_points(state), state.rim_perimeter_rest).a_ch


@log_function_call
def shaking_mechanism_experiment(
    spec: Optional[BagSpec] = None,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    policy_config: Optional[PolicyConfig] = None,
    primitive_config: Optional[PrimitiveConfig] = None,
    slow_speed: float = SLOW_SHAKING_SPEED,
) -> MechanismResult:
    """
    Normalised opening area after one fast shaking stroke versus the same path
    driven slowly, paired over seeds.

    Args:
        spec: Bag to shake; defaults to BagSpec()
        seeds: Seeds of the starting bags
        policy_config: Grasp height, separation and H' floor
        primitive_config: Shaking height H and fast speed v
        slow_speed: Speed of the slow control stroke in m/s

    Returns:
        Control (slow) and treatment (fast) a_ch per seed
    """
    spec = spec or BagSpec()
    policy_config = policy_config or PolicyConfig()
    primitive_config = primitive_config or PrimitiveConfig()
    fast = DualArmShaking(
        H=primitive_config.shaking_height,
        H_prime=policy_config.min_h_prime,
        v=primitive_config.shaking_speed,
    )
    slow = replace(fast, v=slow_speed)
    control: list[float] = []
    treatment: list[float] = []
    for seed in seeds:
        start = held_scene(spec, seed, policy_config, primitive_config)
        for command, results in ((slow, control), (fast, treatment)):
            scene = _fork(start)
            execute_trajectory(
                scene, gen_dual_arm_shaking(command, scene.pair, primitive_config)
            )
            scene.settle(policy_config.settle_time)
            results.append(_a_ch(scene.state))
    result = MechanismResult(
        "dual-arm shaking speed", "a_ch", tuple(seeds), tuple(control), tuple(treatment)
    )
    structured_logger.info(
        "Shaking mechanism measured", mean_delta=result.mean_delta, seeds=len(seeds)
    )
    return result


@log_function_call
def adjustment_mechanism_experiment(
    spec: Optional[BagSpec] = None,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    policy_config: Optional[PolicyConfig] = None,
    primitive_config: Optional[PrimitiveConfig] = None,
) -> MechanismResult:
    """Rim layer separation before and after one Bag Adjustment, per seed."""
    spec = spec or BagSpec()
    policy_config = policy_config or PolicyConfig()
    primitive_config = primitive_config or PrimitiveConfig()
    before: list[float] = []
    after: list[float] = []
    for seed in seeds:
        scene = held_scene(spec, seed, policy_config, primitive_config)
        before.append(rim_separation(scene.state))
        command = primitive_config.bag_adjustment(scene.pair.separation)
        execute_trajectory(
            scene, gen_bag_adjustment(command, scene.pair, primitive_config)
        )
        scene.settle(policy_config.settle_time)
        after.append(rim_separation(scene.state))
    result = MechanismResult(
        "bag adjustment", "rim_separation", tuple(seeds), tuple(before), tuple(after)
    )
    structured_logger.info(
        "Adjustment mechanism measured", mean_delta=result.mean_delta, seeds=len(seeds)
    )
    return result


def generalization_configs(
    base: TrialConfig, trials: int = GENERALIZATION_TRIALS
) -> dict[str, list[TrialConfig]]:
    """
    Trials on a bag size, a render pattern and a body colour the perception
    was not tuned on. Pattern and colour only reach the RGB render.
    """
    cases = {
        "unseen_size": replace(
            base, bag=replace(base.bag, width=UNSEEN_SIZE[0], height=UNSEEN_SIZE[1])
        ),
        "unseen_pattern": replace(base, pattern="stripes"),
        "red_color": replace(base, body_color=RED_BODY),
    }
    return {
        name: [replace(config, seed=seed) for seed in range(trials)]
        for name, config in cases.items()
    }


@log_function_call
def run_generalization(
    base: TrialConfig,
    trials: int = GENERALIZATION_TRIALS,
    runner: TrialRunner = run_trial,
) -> dict[str, ResultRow]:
    """Run every generalisation case and aggregate each into one row."""
    results: dict[str, ResultRow] = {}
    for name, configs in generalization_configs(base, trials).items():
        [row] = aggregate(runner(config, None) for config in configs)
        results[name] = row
    return results
