"""
Interpolated lookup and CSV export of dual-gripper trajectories.
"""

import csv
from pathlib import Path

import numpy as np

from shakingbot_sim.bag_model.models import Pose
from shakingbot_sim.primitives.models import DualTrajectory, PrimitiveError
from shakingbot_sim.utils.file_utils import PathLike, ensure_parent_dir

CSV_COLUMNS = ("t", "xL", "yL", "zL", "pitchL", "xR", "yR", "zR", "pitchR")
TIME_TOLERANCE = 1e-12


def sample(trajectory: DualTrajectory, t: float) -> tuple[Pose, Pose]:
    """
    Left and right poses at time t by linear interpolation between samples.

    Raises:
        PrimitiveError: If t lies outside [0, duration]
    """
    if not -TIME_TOLERANCE <= t <= trajectory.duration + TIME_TOLERANCE:
        raise PrimitiveError(
            f"Sample time {t} is outside [0, {trajectory.duration:.6f}]"
        )
    poses = []
    for rows in (trajectory.left, trajectory.right):
        values = [float(np.interp(t, trajectory.times, rows[:, c])) for c in range(4)]
        poses.append(Pose(*values))
    return poses[0], poses[1]


def write_trajectory_csv(trajectory: DualTrajectory, path: PathLike) -> Path:
    """Write one row per sample in the fixed column order."""
    target = ensure_parent_dir(path)
    with open(target, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for t, left, right in zip(trajectory.times, trajectory.left, trajectory.right):
            writer.writerow([repr(float(v)) for v in (t, *left, *right)])
    return target
