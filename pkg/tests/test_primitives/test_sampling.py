"""Test trajectory lookup, time grids and CSV export."""

import csv
from pathlib import Path

import numpy as np
import pytest

from shakingbot_sim.bag_model import Pose
from shakingbot_sim.primitives import (
    CSV_COLUMNS,
    GripperPair,
    PrimitiveError,
    gen_lift,
    sample,
    time_grid,
    write_trajectory_csv,
)


def _make_lift() -> tuple[GripperPair, float]:
    pair = GripperPair(Pose(-0.15, 0.0, 0.2), Pose(0.15, 0.0, 0.2), True, True)
    return pair, 0.3


class TestSample:
    """Tests for sample."""

    def test_endpoints(self) -> None:
        pair, dz = _make_lift()
        trajectory = gen_lift(pair, dz)
        left, right = sample(trajectory, 0.0)
        assert left == pair.left
        end_left, _ = sample(trajectory, trajectory.duration)
        assert end_left.z == pytest.approx(0.5)
        assert right.x == pytest.approx(0.15)

    def test_midpoint_is_mean(self) -> None:
        pair, dz = _make_lift()
        trajectory = gen_lift(pair, dz)
        left, _ = sample(trajectory, trajectory.duration / 2.0)
        assert left.z == pytest.approx(0.35)

    @pytest.mark.parametrize("t", [-0.1, 100.0])
    def test_out_of_range(self, t: float) -> None:
        pair, dz = _make_lift()
        with pytest.raises(PrimitiveError, match="outside"):
            sample(gen_lift(pair, dz), t)


class TestTimeGrid:
    """Tests for time_grid."""

    def test_final_short_interval(self) -> None:
        times = time_grid(0.01, 1.0 / 240.0)
        assert len(times) == 4
        assert times[-1] == 0.01
        assert np.all(np.diff(times) > 0)

    def test_exact_multiple(self) -> None:
        times = time_grid(0.5, 0.125)
        np.testing.assert_allclose(times, [0.0, 0.125, 0.25, 0.375, 0.5])

    def test_zero_duration(self) -> None:
        np.testing.assert_array_equal(time_grid(0.0, 0.01), [0.0])

    def test_negative_duration(self) -> None:
        with pytest.raises(PrimitiveError):
            time_grid(-1.0, 0.01)


def test_write_trajectory_csv(tmp_path: Path) -> None:
    """One header row plus one row per sample, in the fixed column order."""
    pair, dz = _make_lift()
    trajectory = gen_lift(pair, dz)
    path = write_trajectory_csv(trajectory, tmp_path / "out" / "lift.csv")
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == trajectory.n_samples + 1
    assert float(rows[-1][3]) == pytest.approx(0.5)
