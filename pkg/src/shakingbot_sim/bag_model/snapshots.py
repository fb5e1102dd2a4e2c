"""
Plain-text snapshots of a bag state.

A snapshot holds a header with the bag spec, seed and time, then one row per
particle (index, x, y, z, label). Reading a snapshot rebuilds the topology from
the spec and seed and restores positions, so velocities come back as zero.
"""

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import structlog

from shakingbot_sim.bag_model.builder import new_bag
from shakingbot_sim.bag_model.models import (
    LABEL_NAMES,
    BagSpec,
    BagState,
    ParticleLabel,
    PhysicsParams,
)
from shakingbot_sim.utils.file_utils import PathLike, read_file, write_lines

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

SNAPSHOT_FORMAT = "#format shakingbot-snapshot 1"
COLUMNS = "#columns index x y z label"


class SnapshotFormatError(ValueError):
    """A snapshot file is malformed or does not match its own header."""


def write_snapshot(state: BagState, path: PathLike) -> Path:
    lines = [
        SNAPSHOT_FORMAT,
        "#spec " + json.dumps(state.spec.to_dict(), sort_keys=True),
        f"#seed {state.topology.seed}",
        f"#time {state.time:.17g}",
        COLUMNS,
    ]
    for index, (position, label) in enumerate(
        zip(state.positions, state.topology.labels)
    ):
        x, y, z = (f"{float(c):.17g}" for c in position)
        lines.append(f"{index} {x} {y} {z} {LABEL_NAMES[ParticleLabel(label)]}")
    written = write_lines(path, lines)
    structured_logger.debug(
        "Snapshot written", path=str(written), particles=state.n_particles
    )
    return written


def _header_value(lines: list[str], key: str) -> str:
    prefix = f"#{key} "
    for line in lines:
        if line.startswith(prefix):
            return line[len(prefix) :]
    raise SnapshotFormatError(f"Snapshot header is missing '#{key}'")


def read_snapshot(path: PathLike, physics: Optional[PhysicsParams] = None) -> BagState:
    """
    Rebuild a BagState from a snapshot file.

    Raises:
        SnapshotFormatError: If the header or rows are malformed
    """
    lines = [line for line in read_file(path).splitlines() if line.strip()]
    if not lines or lines[0] != SNAPSHOT_FORMAT:
        raise SnapshotFormatError(f"{path} is not a bag snapshot")
    try:
        spec = BagSpec.from_dict(json.loads(_header_value(lines, "spec")))
        seed = int(_header_value(lines, "seed"))
        time = float(_header_value(lines, "time"))
    except (json.JSONDecodeError, ValueError) as e:
        raise SnapshotFormatError(f"Bad snapshot header in {path}: {e}") from e

    state = new_bag(spec, seed, physics)
    rows = [line.split() for line in lines if not line.startswith("#")]
    if len(rows) != state.n_particles:
        raise SnapshotFormatError(
            f"Snapshot has {len(rows)} rows, the bag has {state.n_particles} particles"
        )
    for row in rows:
        if len(row) != 5:
            raise SnapshotFormatError(f"Malformed snapshot row: {' '.join(row)}")
        index = int(row[0])
        if ParticleLabel.from_name(row[4]) != state.topology.labels[index]:
            raise SnapshotFormatError(f"Label mismatch at particle {index}")
        state.positions[index] = np.array([float(c) for c in row[1:4]])
    state.time = time
    return state
