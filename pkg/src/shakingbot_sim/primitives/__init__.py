"""
Action primitives: parameterised commands turned into gripper trajectories.
"""

from shakingbot_sim.primitives.builder import TrajectoryBuilder, time_grid
from shakingbot_sim.primitives.generators import (
    APEX_PITCH,
    gen_bag_adjustment,
    gen_dual_arm_shaking,
    gen_dual_lift,
    gen_hold,
    gen_lift,
    gen_one_arm_holding,
    gen_recenter,
    gen_shake,
)
from shakingbot_sim.primitives.models import (
    BagAdjustment,
    DualArmShaking,
    DualTrajectory,
    EventKind,
    GripperPair,
    OneArmHolding,
    PrimitiveCommand,
    PrimitiveConfig,
    PrimitiveError,
    Recenter,
    Shake,
    TrajectoryEvent,
)
from shakingbot_sim.primitives.sampling import (
    CSV_COLUMNS,
    sample,
    write_trajectory_csv,
)

__all__ = [
    # Commands and trajectories
    "BagAdjustment",
    "DualArmShaking",
    "OneArmHolding",
    "Shake",
    "Recenter",
    "PrimitiveCommand",
    "DualTrajectory",
    "EventKind",
    "GripperPair",
    "TrajectoryEvent",
    "PrimitiveConfig",
    "PrimitiveError",
    "APEX_PITCH",
    "CSV_COLUMNS",
    # Generators
    "gen_bag_adjustment",
    "gen_dual_arm_shaking",
    "gen_one_arm_holding",
    "gen_shake",
    "gen_recenter",
    "gen_dual_lift",
    "gen_lift",
    "gen_hold",
    # Building and sampling
    "TrajectoryBuilder",
    "time_grid",
    "sample",
    "write_trajectory_csv",
]
