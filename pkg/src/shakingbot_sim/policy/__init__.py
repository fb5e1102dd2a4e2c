"""
The ShakingBot policy: rule-based decisions, insertion planning and the
end-to-end controller.
"""

from shakingbot_sim.policy.controller import ShakingBotController, judge_success
from shakingbot_sim.policy.decisions import decide, holding_height, shaking_height
from shakingbot_sim.policy.execution import (
    PARKED_POSES,
    Scene,
    dropped_attachments,
    execute_trajectory,
)
from shakingbot_sim.policy.insertion import insertion_plan, principal_axis
from shakingbot_sim.policy.models import (
    DEFAULT_BUDGET,
    TRANSITIONS,
    BottomSensing,
    Decision,
    DualGrasp,
    InsertionInfeasibleError,
    ItemSpec,
    Phase,
    PolicyCommand,
    PolicyConfig,
    PolicyOutcome,
    PolicyState,
    PolicyVariant,
    RegraspError,
    default_items,
)
from shakingbot_sim.policy.sensing import (
    bag_bottom_height,
    grasp_point_3d,
    nearest_support_pixel,
    support_centroid,
)

__all__ = [
    # Models
    "BottomSensing",
    "Decision",
    "DualGrasp",
    "ItemSpec",
    "Phase",
    "PolicyCommand",
    "PolicyConfig",
    "PolicyOutcome",
    "PolicyState",
    "PolicyVariant",
    "DEFAULT_BUDGET",
    "TRANSITIONS",
    "default_items",
    # Errors
    "InsertionInfeasibleError",
    "RegraspError",
    # Decisions
    "decide",
    "holding_height",
    "shaking_height",
    # Sensing
    "bag_bottom_height",
    "grasp_point_3d",
    "nearest_support_pixel",
    "support_centroid",
    # Insertion
    "insertion_plan",
    "principal_axis",
    # Execution
    "PARKED_POSES",
    "Scene",
    "dropped_attachments",
    "execute_trajectory",
    "ShakingBotController",
    "judge_success",
]
