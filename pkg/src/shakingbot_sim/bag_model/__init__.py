"""
Particle model of a deformable two-layer bag on a table.
"""

from shakingbot_sim.bag_model.builder import lattice_shape, new_bag, stable_substep
from shakingbot_sim.bag_model.items import ItemBody, step_items
from shakingbot_sim.bag_model.models import (
    LABEL_NAMES,
    STRAIGHT_DOWN,
    TABLE_HEIGHT,
    AttachmentError,
    BagSpec,
    BagState,
    BagTopology,
    GraspMissError,
    GripperAttachment,
    GripperId,
    InvalidBagSpecError,
    ItemShape,
    PaintRegion,
    ParticleLabel,
    PhysicsParams,
    Pose,
    RimInvariantError,
    SettleResult,
    SimulationDivergedError,
    SpringKind,
)
from shakingbot_sim.bag_model.physics import (
    DEFAULT_DT,
    MAX_DT,
    advance,
    attach,
    pinned_targets,
    pitch_rotation,
    release,
    settle,
    step,
)
from shakingbot_sim.bag_model.queries import (
    bag_centroid,
    label_centroid,
    lowest_height,
    place_rigidly,
    rim_points,
    rim_separation,
)
from shakingbot_sim.bag_model.snapshots import (
    SnapshotFormatError,
    read_snapshot,
    write_snapshot,
)

__all__ = [
    # Models
    "BagSpec",
    "BagState",
    "BagTopology",
    "GripperAttachment",
    "GripperId",
    "ItemShape",
    "PaintRegion",
    "ParticleLabel",
    "PhysicsParams",
    "Pose",
    "SettleResult",
    "SpringKind",
    "LABEL_NAMES",
    "STRAIGHT_DOWN",
    "TABLE_HEIGHT",
    "DEFAULT_DT",
    "MAX_DT",
    # Errors
    "AttachmentError",
    "GraspMissError",
    "InvalidBagSpecError",
    "RimInvariantError",
    "SimulationDivergedError",
    "SnapshotFormatError",
    # Construction and dynamics
    "lattice_shape",
    "new_bag",
    "stable_substep",
    "step",
    "advance",
    "attach",
    "release",
    "settle",
    "pinned_targets",
    "pitch_rotation",
    # Items
    "ItemBody",
    "step_items",
    # Queries
    "bag_centroid",
    "label_centroid",
    "lowest_height",
    "place_rigidly",
    "rim_points",
    "rim_separation",
    # Snapshots
    "read_snapshot",
    "write_snapshot",
]
