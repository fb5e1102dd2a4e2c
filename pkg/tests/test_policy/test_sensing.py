"""Test reading the bag bottom, centroid and grasp points off observations."""

import numpy as np
import pytest

from shakingbot_sim.bag_model import BagState
from shakingbot_sim.perception import render_topdown
from shakingbot_sim.policy import (
    bag_bottom_height,
    grasp_point_3d,
    nearest_support_pixel,
    support_centroid,
)
from tests.conftest import make_observation


def _make_dangle(state: BagState, bottom: float) -> BagState:
    """Stand the flat bag up in the xz plane with its lowest particle at ``bottom``."""
    hanging = state.copy()
    old = state.positions
    hanging.positions[:, 1] = old[:, 2]
    hanging.positions[:, 2] = old[:, 1] - old[:, 1].min() + bottom
    return hanging


class TestBagBottomHeight:
    """Tests for bag_bottom_height."""

    def test_lowest_underside_in_window(self) -> None:
        depth = np.zeros((64, 64))
        depth[20:45, 28:36] = 0.4
        underside = np.where(depth > 0, 0.3, 0.0)
        underside[36, 33] = 0.12
        # outside the 20 px window around the centre
        underside[44, 29] = 0.05
        obs = make_observation(depth, underside)
        sensing = bag_bottom_height(obs, (0.0, 0.0))
        assert sensing.sensed
        assert sensing.height == pytest.approx(0.12)

    def test_depth_used_without_underside(self) -> None:
        depth = np.zeros((64, 64))
        depth[30:34, 30:34] = 0.25
        depth[31, 31] = 0.2
        sensing = bag_bottom_height(make_observation(depth), (0.0, 0.0))
        assert sensing == (pytest.approx(0.2), True)

    def test_empty_window_falls_back(self) -> None:
        depth = np.zeros((64, 64))
        depth[0:5, 0:5] = 0.3
        sensing = bag_bottom_height(make_observation(depth), (0.0, 0.0), fallback=0.55)
        assert sensing.height == 0.55
        assert not sensing.sensed

    def test_window_at_raster_edge(self) -> None:
        depth = np.zeros((64, 64))
        depth[0:3, 0:3] = 0.3
        sensing = bag_bottom_height(make_observation(depth), (-0.32, -0.32))
        assert sensing.sensed

    def test_dangling_bag(self, flat_bag: BagState) -> None:
        hanging = _make_dangle(flat_bag, 0.12)
        obs = render_topdown(hanging)
        sensing = bag_bottom_height(obs, (0.0, 0.003))
        assert sensing.sensed
        assert sensing.height == pytest.approx(0.12, abs=0.002)

    def test_flat_bag_bottom_on_table(self, flat_bag: BagState) -> None:
        sensing = bag_bottom_height(render_topdown(flat_bag), (0.0, 0.0))
        assert sensing.sensed
        assert sensing.height == pytest.approx(0.0, abs=0.005)


class TestSupport:
    """Tests for the support centroid and grasp point helpers."""

    def test_centroid_of_block(self) -> None:
        depth = np.zeros((64, 64))
        depth[10:20, 40:50] = 0.1
        centroid = support_centroid(make_observation(depth))
        assert centroid is not None
        # pixel centre (44.5, 14.5) on a 0.01 m grid starting at -0.32
        assert centroid[0] == pytest.approx(0.13)
        assert centroid[1] == pytest.approx(-0.17)

    def test_empty_scene(self) -> None:
        obs = make_observation(np.zeros((64, 64)))
        assert support_centroid(obs) is None
        assert nearest_support_pixel(obs, (0.0, 0.0)) is None

    def test_nearest_pixel(self) -> None:
        depth = np.zeros((64, 64))
        depth[5, 5] = 0.1
        depth[40, 40] = 0.1
        pixel = nearest_support_pixel(make_observation(depth), (0.1, 0.1))
        assert pixel == (40.0, 40.0)

    def test_grasp_point_on_surface(self) -> None:
        depth = np.zeros((64, 64))
        depth[40, 12] = 0.07
        x, y, z = grasp_point_3d(make_observation(depth), (12.2, 39.8))
        assert x == pytest.approx(-0.195)
        assert y == pytest.approx(0.085)
        assert z == pytest.approx(0.07)
