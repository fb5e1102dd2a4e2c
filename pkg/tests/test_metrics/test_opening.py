"""Test opening metrics."""

import math

import numpy as np
import pytest

from shakingbot_sim.metrics import (
    DEFAULT_E_CAP,
    OpeningMetrics,
    OpeningThresholds,
    opening_metrics,
    opening_ok,
    reference_area,
)
from tests.conftest import make_circle


def _perimeter(points: np.ndarray) -> float:
    return float(np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1).sum())


def _make_metrics(a_ch: float, e_ch: float) -> OpeningMetrics:
    return OpeningMetrics(np.zeros((0, 2)), 0.0, a_ch, e_ch, 0.0)


class TestOpeningMetrics:
    """Tests for opening_metrics."""

    def test_circle_is_fully_open(self) -> None:
        rim = make_circle(48, 0.1)
        metrics = opening_metrics(rim, _perimeter(rim))
        assert metrics.a_ch == pytest.approx(1.0, abs=0.02)
        assert metrics.e_ch == pytest.approx(1.0, abs=0.01)
        assert not metrics.degenerate

    def test_ellipse_elongation(self) -> None:
        rim = make_circle(64, 0.1)
        rim[:, 0] *= 2.0
        metrics = opening_metrics(rim, _perimeter(rim))
        assert metrics.e_ch == pytest.approx(2.0, rel=0.05)

    def test_collapsed_rim(self) -> None:
        rim = np.stack([np.linspace(-0.1, 0.1, 10), np.zeros(10), np.zeros(10)], axis=1)
        metrics = opening_metrics(rim, 0.4)
        assert metrics.a_ch == 0.0
        assert metrics.e_ch == DEFAULT_E_CAP
        assert metrics.degenerate

    def test_collapsed_rim_reports_configured_cap(self) -> None:
        rim = np.zeros((6, 3))
        cap = OpeningThresholds(e_cap=12.0).e_cap
        metrics = opening_metrics(rim, 0.4, cap)
        assert metrics.e_ch == 12.0
        assert metrics.degenerate

    def test_slit_is_capped(self) -> None:
        rim = make_circle(32, 0.1)
        rim[:, 1] *= 1e-4
        metrics = opening_metrics(rim, 0.6, e_cap=5.0)
        assert not metrics.degenerate
        assert metrics.e_ch == 5.0

    def test_rigid_motion_invariance(self) -> None:
        rim = make_circle(40, 0.1)
        rim[:, 0] *= 1.7
        base = opening_metrics(rim, 0.8)
        angle = 0.7
        rotation = np.array(
            [
                [math.cos(angle), -math.sin(angle), 0.0],
                [math.sin(angle), math.cos(angle), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        moved = rim @ rotation.T + np.array([0.3, -0.2, 0.5])
        other = opening_metrics(moved, 0.8)
        assert other.a_ch == pytest.approx(base.a_ch, abs=1e-9)
        assert other.e_ch == pytest.approx(base.e_ch, abs=1e-9)

    def test_scale_invariance(self) -> None:
        rim = make_circle(40, 0.1)
        rim[:, 1] *= 0.6
        base = opening_metrics(rim, 0.8)
        scaled = opening_metrics(rim * 1.5, 0.8 * 1.5)
        assert scaled.a_ch == pytest.approx(base.a_ch, abs=1e-9)
        assert scaled.e_ch == pytest.approx(base.e_ch, abs=1e-9)

    def test_rim_separation_pairs_front_and_back(self) -> None:
        front = np.stack([np.linspace(0.0, 0.3, 5), np.zeros(5), np.zeros(5)], axis=1)
        back = front[::-1] + np.array([0.0, 0.02, 0.0])
        metrics = opening_metrics(np.vstack([front, back]), 0.6)
        assert metrics.rim_separation == pytest.approx(0.02)

    def test_empty_rim_rejected(self) -> None:
        with pytest.raises(ValueError):
            opening_metrics(np.zeros((0, 3)), 0.6)

    def test_reference_area(self) -> None:
        assert reference_area(2 * math.pi) == pytest.approx(math.pi)
        with pytest.raises(ValueError):
            reference_area(0.0)


class TestOpeningOk:
    """Tests for opening_ok."""

    @pytest.mark.parametrize(
        "a_ch, e_ch, expected",
        [(0.5, 1.5, True), (0.39, 1.5, False), (0.5, 2.6, False), (0.4, 2.5, True)],
    )
    def test_thresholds(self, a_ch: float, e_ch: float, expected: bool) -> None:
        thresholds = OpeningThresholds(0.4, 2.5)
        assert opening_ok(_make_metrics(a_ch, e_ch), thresholds) is expected

    @pytest.mark.parametrize("a_min, e_max", [(0.0, 2.5), (1.0, 2.5), (0.4, 1.0)])
    def test_invalid_thresholds(self, a_min: float, e_max: float) -> None:
        with pytest.raises(ValueError):
            OpeningThresholds(a_min, e_max)

    def test_cap_below_e_max_rejected(self) -> None:
        with pytest.raises(ValueError, match="e_cap"):
            OpeningThresholds(0.4, 2.5, e_cap=2.0)
        assert OpeningThresholds().e_cap == DEFAULT_E_CAP

    def test_metrics_to_dict(self) -> None:
        rim = make_circle(12, 0.1)
        data = opening_metrics(rim, 0.6).to_dict()
        assert data["hull_vertices"] == 12
        assert set(data) >= {"a_ch", "e_ch", "area", "rim_separation"}
