"""Test the Harris and Canny operators and grasp point extraction."""

import math

import numpy as np
import pytest

from shakingbot_sim.perception import (
    DetectionStatus,
    HandleDetectionError,
    Masks,
    PerceptionConfig,
    analytic_masks,
    canny_edges,
    canny_rim,
    grasp_points,
    harris_corners,
    harris_handles,
    harris_response,
)

SOBEL_SMOOTH = (1.0, 2.0, 1.0)


def _clamped(image: np.ndarray, row: int, col: int) -> float:
    rows, cols = image.shape
    return float(image[min(max(row, 0), rows - 1), min(max(col, 0), cols - 1)])


def _brute_force_response(image: np.ndarray, sigma: float, k: float) -> np.ndarray:
    """Harris response with explicit loops and edge-replicated borders."""
    rows, cols = image.shape
    ix = np.zeros(image.shape)
    iy = np.zeros(image.shape)
    for r in range(rows):
        for c in range(cols):
            for d, w in zip((-1, 0, 1), SOBEL_SMOOTH):
                right = _clamped(image, r + d, c + 1)
                left = _clamped(image, r + d, c - 1)
                below = _clamped(image, r + 1, c + d)
                above = _clamped(image, r - 1, c + d)
                ix[r, c] += w * (right - left)
                iy[r, c] += w * (below - above)

    radius = int(4.0 * sigma + 0.5)
    offsets = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    kernel /= kernel.sum()

    def window(values: np.ndarray, r: int, c: int) -> float:
        total = 0.0
        for a, wa in zip(offsets, kernel):
            for b, wb in zip(offsets, kernel):
                total += wa * wb * _clamped(values, r + int(a), c + int(b))
        return total

    response = np.zeros(image.shape)
    for r in range(rows):
        for c in range(cols):
            sxx = window(ix * ix, r, c)
            syy = window(iy * iy, r, c)
            sxy = window(ix * iy, r, c)
            response[r, c] = sxx * syy - sxy * sxy - k * (sxx + syy) ** 2
    return response


def _make_square(size: int = 32, lo: int = 10, hi: int = 22) -> np.ndarray:
    image = np.zeros((size, size))
    image[lo:hi, lo:hi] = 1.0
    return image


def _make_disk(size: int, radius: float, value: float = 0.5) -> np.ndarray:
    rows, cols = np.mgrid[0:size, 0:size]
    centre = (size - 1) / 2.0
    inside = (rows - centre) ** 2 + (cols - centre) ** 2 <= radius**2
    return np.where(inside, value, 0.0)


class TestHarris:
    """Tests for the Harris corner operator."""

    def test_response_matches_brute_force(self) -> None:
        rng = np.random.default_rng(3)
        image = rng.uniform(0.0, 1.0, size=(32, 32))
        expected = _brute_force_response(image, 1.5, 0.04)
        np.testing.assert_allclose(
            harris_response(image, 1.5, 0.04), expected, rtol=1e-9, atol=1e-12
        )

    def test_square_corners(self) -> None:
        corners = harris_corners(_make_square())
        assert len(corners) >= 4
        found = np.array([(c.u, c.v) for c in corners[:4]])
        for expected in [(9.5, 9.5), (21.5, 9.5), (9.5, 21.5), (21.5, 21.5)]:
            distance = np.hypot(*(found - np.array(expected)).T).min()
            assert distance <= 2.0

    def test_corners_sorted_by_strength(self) -> None:
        corners = harris_corners(_make_square())
        strengths = [c.strength for c in corners]
        assert strengths == sorted(strengths, reverse=True)

    def test_constant_raster_fails(self) -> None:
        assert harris_corners(np.full((32, 32), 0.3)) == []
        with pytest.raises(HandleDetectionError):
            harris_handles(np.full((32, 32), 0.3))

    def test_two_dots(self) -> None:
        image = np.zeros((48, 48))
        image[12, 10] = 1.0
        image[30, 36] = 1.0
        left, right = harris_handles(image)
        assert left == pytest.approx((10.0, 12.0), abs=1.0)
        assert right == pytest.approx((36.0, 30.0), abs=1.0)

    def test_translation_equivariance(self) -> None:
        image = np.zeros((64, 64))
        image[12:26, 15:33] = 1.0
        shifted = np.roll(image, (7, 5), axis=(0, 1))
        base = harris_corners(image)
        moved = harris_corners(shifted)
        assert len(base) == len(moved)
        for a, b in zip(base, moved):
            assert b.u == pytest.approx(a.u + 5.0, abs=1e-9)
            assert b.v == pytest.approx(a.v + 7.0, abs=1e-9)


class TestCanny:
    """Tests for the Canny edge operator."""

    def test_disk_area(self) -> None:
        rim = canny_rim(_make_disk(128, 45.0), pixel_scale=1.0)
        assert rim.area == pytest.approx(math.pi * 45.0**2, rel=0.05)

    def test_area_in_square_metres(self) -> None:
        rim = canny_rim(_make_disk(128, 45.0), pixel_scale=0.01)
        unit = canny_rim(_make_disk(128, 45.0), pixel_scale=1.0)
        assert rim.area == pytest.approx(unit.area * 1e-4)

    def test_constant_raster(self) -> None:
        rim = canny_rim(np.full((64, 64), 0.7), pixel_scale=1.0)
        assert rim.area == 0.0
        assert rim.points.shape == (0, 2)
        assert not canny_edges(np.full((64, 64), 0.7)).any()

    def test_step_edge_is_one_pixel_wide(self) -> None:
        image = np.zeros((64, 64))
        image[:, 32:] = 1.0
        edges = canny_edges(image)
        np.testing.assert_array_equal(edges.sum(axis=1), np.ones(64, dtype=int))
        assert set(np.nonzero(edges)[1]) <= {31, 32}

    def test_isolated_weak_edge_is_dropped(self) -> None:
        image = np.zeros((64, 64))
        image[:, 16:] = 1.0
        image[:, 48:] = 1.2
        edges = canny_edges(image)
        columns = set(np.nonzero(edges)[1])
        assert columns & {15, 16}
        assert not columns & {47, 48}

    def test_translation_equivariance(self) -> None:
        image = _make_disk(96, 20.0)
        shifted = np.roll(image, (4, -6), axis=(0, 1))
        np.testing.assert_array_equal(
            np.roll(canny_edges(image), (4, -6), axis=(0, 1)), canny_edges(shifted)
        )


class TestGraspPoints:
    """Tests for grasp_points."""

    @staticmethod
    def _make_masks(handle: np.ndarray) -> Masks:
        return Masks(handle=handle, rim=np.zeros_like(handle))

    def test_two_largest_components(self) -> None:
        handle = np.zeros((64, 64), dtype=bool)
        handle[10:20, 40:50] = True
        handle[30:36, 4:10] = True
        handle[60, 60] = True
        detection = grasp_points(self._make_masks(handle))
        assert detection.status is DetectionStatus.BOTH
        assert not detection.missing
        assert len(detection.points) == 2
        assert detection.points[0] == pytest.approx((6.5, 32.5))
        assert detection.points[1] == pytest.approx((44.5, 14.5))

    def test_single_component(self) -> None:
        handle = np.zeros((64, 64), dtype=bool)
        handle[10:20, 10:40] = True
        detection = grasp_points(self._make_masks(handle))
        assert detection.status is DetectionStatus.PARTIAL
        assert detection.missing
        assert len(detection.points) == 1
        assert detection.points[0] == pytest.approx((24.5, 14.5))

    def test_empty_mask(self) -> None:
        detection = grasp_points(self._make_masks(np.zeros((64, 64), dtype=bool)))
        assert detection.status is DetectionStatus.NONE
        assert detection.points == ()


def test_analytic_masks_place_disks_on_corners() -> None:
    image = np.zeros((64, 64))
    image[20, 16] = 1.0
    image[40, 48] = 1.0
    config = PerceptionConfig(handle_disk_radius=4)
    masks = analytic_masks(image, config)
    assert masks.handle[20, 16]
    assert masks.handle[40, 48]
    assert not (masks.handle & masks.rim).any()
    detection = grasp_points(masks)
    assert detection.status is DetectionStatus.BOTH
