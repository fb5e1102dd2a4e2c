"""
End-to-end ShakingBot controller: perceive, grasp, open, hold, insert,
regrasp and lift.
"""

import logging
from typing import Optional, Sequence

import numpy as np
import structlog

from shakingbot_sim.bag_model.items import ItemBody
from shakingbot_sim.bag_model.models import (
    TABLE_HEIGHT,
    BagState,
    GraspMissError,
    GripperId,
)
from shakingbot_sim.bag_model.queries import rim_points
from shakingbot_sim.log_utils import log_function_call
from shakingbot_sim.metrics.geometry import convex_hull_2d, point_in_convex_polygon
from shakingbot_sim.metrics.models import FloatArray, OpeningMetrics
from shakingbot_sim.metrics.opening import hull_metrics, opening_metrics
from shakingbot_sim.perception.analytic import analytic_masks, canny_rim, grasp_points
from shakingbot_sim.perception.labeling import oracle_masks
from shakingbot_sim.perception.models import (
    Camera,
    Masks,
    Observation,
    PerceptionConfig,
)
from shakingbot_sim.perception.render import BASE_COLOR, render_topdown
from shakingbot_sim.policy.decisions import decide, holding_height
from shakingbot_sim.policy.execution import (
    Scene,
    dropped_attachments,
    execute_trajectory,
)
from shakingbot_sim.policy.insertion import insertion_plan
from shakingbot_sim.policy.models import (
    DEFAULT_BUDGET,
    Decision,
    DualGrasp,
    InsertionInfeasibleError,
    ItemSpec,
    Phase,
    PolicyConfig,
    PolicyOutcome,
    PolicyState,
    PolicyVariant,
    RegraspError,
    command_name,
    default_items,
)
from shakingbot_sim.policy.sensing import (
    bag_bottom_height,
    grasp_point_3d,
    support_centroid,
)
from shakingbot_sim.primitives.generators import (
    gen_bag_adjustment,
    gen_dual_arm_shaking,
    gen_dual_lift,
    gen_lift,
    gen_one_arm_holding,
    gen_recenter,
    gen_shake,
)
from shakingbot_sim.primitives.models import (
    BagAdjustment,
    DualArmShaking,
    OneArmHolding,
    PrimitiveConfig,
    Recenter,
    Shake,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

DECIDING_PHASES = (Phase.PERCEIVE, Phase.GRASP, Phase.OPEN)
# Pause between regrasp attempts so the scene can change
REGRASP_PAUSE = 0.25


def judge_success(
    placed: Sequence[bool], contained: Sequence[bool], n_items: int
) -> tuple[bool, bool]:
    """
    Return (partial, full) from per-item flags.

    An item counts once it was placed in the opening and is still off the
    table after the lift. Partial needs one such item, full needs all of them.
    """
    bagged = [p and c for p, c in zip(placed, contained)]
    partial = any(bagged)
    full = partial and len(bagged) == n_items and all(bagged)
    return partial, full


class ShakingBotController:
    """
    Runs the ShakingBot phase machine on one bag until the bag is lifted.

    One controller drives one simulation at a time; ``run`` works on a copy of
    the given state.
    """

    def __init__(
        self,
        policy_config: Optional[PolicyConfig] = None,
        primitive_config: Optional[PrimitiveConfig] = None,
        perception_config: Optional[PerceptionConfig] = None,
        variant: Optional[PolicyVariant] = None,
        items: Optional[Sequence[ItemSpec]] = None,
        budget: int = DEFAULT_BUDGET,
        pattern: Optional[str] = None,
        body_color: tuple[int, int, int] = BASE_COLOR,
    ) -> None:
        self.config = policy_config or PolicyConfig()
        self.primitive_config = primitive_config or PrimitiveConfig()
        self.perception_config = perception_config or PerceptionConfig()
        self.variant = variant or PolicyVariant()
        self.items = tuple(default_items() if items is None else items)
        self.budget = budget
        self.pattern = pattern
        self.body_color = body_color
        self.scene: Optional[Scene] = None

    @property
    def camera(self) -> Camera:
        return self.perception_config.camera

    # Perception

    def observe(self, scene: Scene) -> Observation:
        return render_topdown(
            scene.state, self.camera, pattern=self.pattern, body_color=self.body_color
        )

    def segment(self, obs: Observation, state: BagState) -> Masks:
        if self.variant.segmentation == "analytic":
            return analytic_masks(obs.depth, self.perception_config)
        return oracle_masks(state, self.camera)

    def opening_hull(self, obs: Observation, state: BagState) -> FloatArray:
        """Convex hull of the opening in table coordinates."""
        if self.variant.segmentation == "analytic":
            rim = canny_rim(obs.depth, obs.pixel_scale, self.perception_config)
            if rim.hull.shape[0] == 0:
                return rim.hull
            return obs.camera.pixel_to_world(rim.hull)
        return convex_hull_2d(rim_points(state)[:, :2])

    def measure(self, obs: Observation, state: BagState) -> OpeningMetrics:
        e_cap = self.config.thresholds.e_cap
        if self.variant.segmentation == "analytic":
            return hull_metrics(
                self.opening_hull(obs, state), state.rim_perimeter_rest, e_cap=e_cap
            )
        return opening_metrics(rim_points(state), state.rim_perimeter_rest, e_cap)

    # Phase machine

    @log_function_call
    def run(self, state: BagState) -> PolicyOutcome:
        """
        Bag the items starting from ``state``.

        Returns:
            The outcome, with the per-iteration metrics trace

        Raises:
            SimulationDivergedError: If the simulation blows up
            PrimitiveError: If a primitive rejects its command
        """
        scene = Scene(
            state.copy(),
            primitive_config=self.primitive_config,
            grasp_radius=self.config.grasp_radius,
        )
        self.scene = scene
        start_time = scene.time
        ps = PolicyState(budget=self.budget)

        while ps.phase in DECIDING_PHASES:
            obs = self.observe(scene)
            masks = self.segment(obs, scene.state)
            if ps.phase is Phase.OPEN:
                ps.record_metrics(self.measure(obs, scene.state), scene.time)
            decision = decide(
                obs,
                masks,
                ps,
                scene.pair,
                self.config,
                self.primitive_config,
                self.variant,
            )
            scene.log(
                "decision",
                phase=ps.phase.value,
                command=[command_name(c) for c in decision.commands],
                reason=decision.reason,
                metrics=None if ps.last_metrics is None else ps.last_metrics.to_dict(),
                actions_used=ps.actions_used,
            )
            self._execute(scene, ps, obs, decision)

        if ps.phase is Phase.HOLD:
            self._hold(scene, ps)
            return self.run_insert_and_lift(scene, ps, start_time)
        return self._lift_only(scene, ps, start_time)

    def _execute(
        self, scene: Scene, ps: PolicyState, obs: Observation, decision: Decision
    ) -> None:
        if not decision.commands:
            ps.move_to(decision.next_phase)
            return
        if ps.phase is not Phase.OPEN:
            for command in decision.commands:
                if isinstance(command, DualGrasp):
                    self._dual_grasp(scene, ps, command)
                elif isinstance(command, (Shake, Recenter)):
                    self._single_arm(scene, obs, command, decision.grasp_point)
                    ps.move_to(Phase.PERCEIVE)
            return

        pc = self.primitive_config
        for command in decision.commands:
            if isinstance(command, BagAdjustment):
                trajectory = gen_bag_adjustment(command, scene.pair, pc)
            elif isinstance(command, DualArmShaking):
                trajectory = gen_dual_arm_shaking(command, scene.pair, pc)
            else:
                raise ValueError(f"{command_name(command)} is not an opening primitive")
            execute_trajectory(scene, trajectory)
            if self._bag_dropped(scene, ps):
                return
        scene.settle(self.config.settle_time)
        ps.move_to(decision.next_phase)

    def _dual_grasp(self, scene: Scene, ps: PolicyState, command: DualGrasp) -> None:
        ps.move_to(Phase.GRASP)
        try:
            scene.grasp(GripperId.LEFT, command.left_point)
            scene.grasp(GripperId.RIGHT, command.right_point)
        except GraspMissError as error:
            structured_logger.warning("Grasp missed", error=str(error))
            scene.release_all()
            ps.move_to(Phase.PERCEIVE)
            return
        lift = gen_dual_lift(
            scene.pair,
            self.config.grasp_lift_height,
            self.config.grasp_separation,
            self.primitive_config,
        )
        execute_trajectory(scene, lift)
        scene.settle(self.config.settle_time)
        ps.move_to(Phase.OPEN)

    def _single_arm(
        self,
        scene: Scene,
        obs: Observation,
        command: Shake | Recenter,
        grasp_point: Optional[tuple[float, float, float]],
    ) -> None:
        if grasp_point is None:
            return
        try:
            scene.grasp(GripperId.LEFT, grasp_point)
        except GraspMissError as error:
            structured_logger.warning(
                "Grasp missed", command=command_name(command), error=str(error)
            )
            return
        if isinstance(command, Shake):
            trajectory = gen_shake(command, scene.pair, self.primitive_config)
        else:
            centroid = support_centroid(obs)
            assert centroid is not None
            trajectory = gen_recenter(
                command, centroid, scene.pair, self.primitive_config
            )
        execute_trajectory(scene, trajectory)
        scene.release_all()
        scene.settle(self.config.settle_time)

    def _bag_dropped(self, scene: Scene, ps: PolicyState) -> bool:
        dropped = dropped_attachments(scene.state, self.config.dropped_distance)
        if not dropped or len(dropped) < len(scene.state.attachments):
            return False
        structured_logger.warning(
            "Bag dropped",
            grippers=[g.value for g in dropped],
            actions_used=ps.actions_used,
        )
        scene.log("dropped", grippers=[g.value for g in dropped])
        scene.release_all()
        scene.settle(self.config.settle_time)
        ps.move_to(Phase.PERCEIVE)
        return True

    def _hold(self, scene: Scene, ps: PolicyState) -> None:
        """One-arm Holding, or the in-air release of the ablation."""
        pair = scene.pair
        if self.variant.use_one_arm_holding:
            obs = self.observe(scene)
            bottom = bag_bottom_height(
                obs, pair.midpoint, self.config.bottom_window_px, TABLE_HEIGHT
            )
            height = holding_height(pair, bottom, self.config)
        else:
            height = float(min(pair.left.z, pair.right.z))
        command = OneArmHolding(height)
        scene.log("decision", phase=ps.phase.value, command=["OneArmHolding"], h=height)
        execute_trajectory(
            scene, gen_one_arm_holding(command, pair, self.primitive_config)
        )
        scene.settle(self.config.settle_time)
        ps.move_to(Phase.INSERT)

    # Insertion and lift

    def _spawn_items(
        self, points: Sequence[tuple[float, float]], drop_z: float
    ) -> list[ItemBody]:
        bodies = []
        for spec, (x, y) in zip(self.items, points):
            body = ItemBody(
                shape=spec.shape,
                radius=spec.radius,
                height=spec.height,
                mass=spec.mass,
                position=np.zeros(3),
            )
            body.position = np.array([x, y, drop_z + body.half_height])
            bodies.append(body)
        return bodies

    def _regrasp(self, scene: Scene) -> None:
        """
        Find the released handle and grasp it with the right gripper.

        Raises:
            RegraspError: If every attempt fails
        """
        left_xy = scene.gripper_pose(GripperId.LEFT).position[:2]
        for attempt in range(1, self.config.regrasp_retries + 1):
            obs = self.observe(scene)
            detection = grasp_points(self.segment(obs, scene.state))
            candidates = [grasp_point_3d(obs, uv) for uv in detection.points]
            candidates.sort(
                key=lambda p: float(np.hypot(p[0] - left_xy[0], p[1] - left_xy[1])),
                reverse=True,
            )
            for point in candidates:
                try:
                    scene.grasp(GripperId.RIGHT, point)
                    return
                except GraspMissError as error:
                    structured_logger.warning(
                        "Regrasp missed", attempt=attempt, error=str(error)
                    )
            scene.settle(REGRASP_PAUSE)
        raise RegraspError(
            f"Released handle not regrasped after {self.config.regrasp_retries} tries"
        )

    def run_insert_and_lift(
        self, scene: Scene, ps: PolicyState, start_time: float = 0.0
    ) -> PolicyOutcome:
        """
        Drop the items into the opening, regrasp the released handle and lift.

        Args:
            scene: Scene after One-arm Holding, the left gripper holding the bag
            ps: Policy state in phase INSERT
            start_time: Simulated time the run started at

        Returns:
            The outcome; a failed regrasp gives a failed outcome with a reason
        """
        obs = self.observe(scene)
        hull = self.opening_hull(obs, scene.state)
        try:
            points = insertion_plan(hull, self.items)
        except InsertionInfeasibleError as error:
            structured_logger.warning("Insertion infeasible", error=str(error))
            points = []

        rim_z = float(rim_points(scene.state)[:, 2].mean())
        placed: list[bool] = []
        if points:
            scene.items = self._spawn_items(points, rim_z + self.config.drop_height)
            scene.log("insert", points=[[round(c, 4) for c in p] for p in points])
            scene.settle(self.config.item_settle_time)
            rim = rim_points(scene.state)
            settled_hull = convex_hull_2d(rim[:, :2])
            rim_z = float(rim[:, 2].mean())
            placed = [
                point_in_convex_polygon(item.position[:2], settled_hull)
                and bool(item.position[2] < rim_z)
                for item in scene.items
            ]
        ps.move_to(Phase.REGRASP)

        try:
            self._regrasp(scene)
        except RegraspError as error:
            structured_logger.warning("Regrasp failed", error=str(error))
            ps.move_to(Phase.FAILED)
            scene.log("failed", reason=str(error))
            return self._outcome(scene, ps, start_time, placed, [], str(error))
        ps.move_to(Phase.LIFT)

        lift = gen_lift(
            scene.pair,
            self.config.lift_height,
            self.config.lift_hold_time,
            self.primitive_config,
        )
        execute_trajectory(scene, lift)
        contained = [
            item.bottom > TABLE_HEIGHT + self.config.contained_margin
            for item in scene.items
        ]
        ps.move_to(Phase.DONE)
        return self._outcome(scene, ps, start_time, placed, contained)

    def _lift_only(
        self, scene: Scene, ps: PolicyState, start_time: float
    ) -> PolicyOutcome:
        """Forced lift before the handles were grasped: nothing can be bagged."""
        if scene.state.attachments:
            execute_trajectory(
                scene,
                gen_lift(
                    scene.pair,
                    self.config.lift_height,
                    self.config.lift_hold_time,
                    self.primitive_config,
                ),
            )
        ps.move_to(Phase.DONE)
        return self._outcome(scene, ps, start_time, [], [])

    def _outcome(
        self,
        scene: Scene,
        ps: PolicyState,
        start_time: float,
        placed: Sequence[bool],
        contained: Sequence[bool],
        failure_reason: Optional[str] = None,
    ) -> PolicyOutcome:
        partial, full = judge_success(placed, contained, len(self.items))
        positions = (
            np.array([item.position for item in scene.items]) if scene.items else None
        )
        outcome = PolicyOutcome(
            open_bag=ps.opened,
            placed=sum(placed),
            contained=sum(contained),
            partial=partial,
            full=full,
            actions=ps.actions_used,
            sim_time=scene.time - start_time,
            forced_lift=ps.forced,
            failure_reason=failure_reason,
            metrics_trace=list(ps.metrics_trace),
            item_positions=positions,
        )
        summary = outcome.to_dict()
        summary.pop("metrics_trace")
        scene.log("outcome", **summary)
        return outcome
