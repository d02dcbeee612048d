import numpy as np
import pytest

from ctrkit.core import BitMask
from ctrkit.errors import NoQualifyingComponentError, TooFewComponentsError
from ctrkit.morphology import (
    Component,
    StructuringElement,
    close,
    connected_components,
    dilate,
    select_heart_component,
    select_lung_components,
)


def flood_fill_components(bits):
    """Recursive flood-fill oracle under 4-connectivity."""
    import sys

    sys.setrecursionlimit(20000)
    h, w = bits.shape
    seen = np.zeros_like(bits, dtype=bool)
    comps = []

    def fill(y, x, acc):
        if y < 0 or y >= h or x < 0 or x >= w:
            return
        if seen[y, x] or not bits[y, x]:
            return
        seen[y, x] = True
        acc.add((x, y))
        fill(y - 1, x, acc)
        fill(y + 1, x, acc)
        fill(y, x - 1, acc)
        fill(y, x + 1, acc)

    for y in range(h):
        for x in range(w):
            if bits[y, x] and not seen[y, x]:
                acc = set()
                fill(y, x, acc)
                comps.append(acc)
    return comps


class TestClose:
    def test_fills_center_hole(self):
        arr = np.zeros((7, 7), dtype=np.uint8)
        arr[1:6, 1:6] = 1
        arr[3, 3] = 0
        out = close(BitMask(arr), StructuringElement(3), 1)
        expect = np.zeros((7, 7), dtype=np.uint8)
        expect[1:6, 1:6] = 1
        assert np.array_equal(out.bits, expect)

    def test_all_zero_fixed_point(self):
        m = BitMask(np.zeros((5, 8), dtype=np.uint8))
        assert close(m, StructuringElement(3), 2) == m

    def test_all_one_fixed_point(self):
        m = BitMask(np.ones((5, 8), dtype=np.uint8))
        assert close(m, StructuringElement(3), 2) == m

    def test_bounded_by_iterated_dilation(self):
        rng = np.random.default_rng(11)
        se = StructuringElement(3)
        for _ in range(25):
            m = BitMask((rng.random((20, 20)) < 0.2).astype(np.uint8))
            closed = close(m, se, 2)
            bound = dilate(dilate(m, se), se)
            assert not np.any(closed.bits & ~bound.bits)

    def test_idempotent_on_solid_rectangles(self):
        se = StructuringElement(3)
        for h, w in [(5, 9), (7, 4), (6, 6)]:
            arr = np.zeros((12, 14), dtype=np.uint8)
            arr[2:2 + h, 3:3 + w] = 1
            m = BitMask(arr)
            once = close(m, se, 1)
            assert close(once, se, 1) == once

    def test_invalid_iterations(self):
        with pytest.raises(ValueError):
            close(BitMask(np.ones((3, 3), dtype=np.uint8)), StructuringElement(3), 0)

    def test_se_validation(self):
        with pytest.raises(ValueError):
            StructuringElement(2)
        with pytest.raises(ValueError):
            StructuringElement(-1)


class TestConnectedComponents:
    def test_two_blocks(self):
        arr = np.zeros((6, 8), dtype=np.uint8)
        arr[0:2, 0:2] = 1
        arr[4:6, 5:7] = 1
        comps = connected_components(BitMask(arr))
        assert len(comps) == 2
        assert [c.area for c in comps] == [4, 4]
        assert comps[0].label == 1 and comps[1].label == 2
        assert comps[0].min_x < comps[1].min_x  # equal-area tie by min_x

    def test_empty_mask(self):
        assert connected_components(BitMask(np.zeros((4, 4), dtype=np.uint8))) == []

    def test_diagonal_contact_does_not_connect(self):
        arr = np.zeros((4, 10), dtype=np.uint8)
        arr[1, 1:9] = 1
        arr[2, 0] = 1  # touches (1,1) only diagonally
        comps = connected_components(BitMask(arr))
        assert [c.area for c in comps] == [8, 1]

    def test_matches_flood_fill_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            bits = (rng.random((32, 32)) < rng.uniform(0.1, 0.6)).astype(np.uint8)
            mask = BitMask(bits)
            comps = connected_components(mask)
            oracle = flood_fill_components(bits)
            got = [c.pixel_set() for c in comps]
            # exact partition equivalence, independent of ordering
            assert sorted(map(sorted, got)) == sorted(map(sorted, oracle))
            # pairwise disjoint and union equals the set bits
            all_pts = set()
            for s in got:
                assert not (all_pts & s)
                all_pts |= s
            assert len(all_pts) == int(bits.sum())
            assert sum(c.area for c in comps) == int(bits.sum())

    def test_labels_sorted_by_area(self):
        arr = np.zeros((10, 20), dtype=np.uint8)
        arr[0:3, 0:4] = 1    # area 12
        arr[5:7, 10:12] = 1  # area 4
        arr[9, 15:20] = 1    # area 5
        comps = connected_components(BitMask(arr))
        assert [c.area for c in comps] == [12, 5, 4]
        assert [c.label for c in comps] == [1, 2, 3]

    def test_component_geometry(self):
        arr = np.zeros((5, 5), dtype=np.uint8)
        arr[1:3, 2:5] = 1
        comp = connected_components(BitMask(arr))[0]
        assert comp.bbox == (2, 1, 4, 2)
        assert comp.centroid == (3.0, 1.5)
        bx0, by0, bx1, by1 = comp.bbox
        assert bx0 <= comp.centroid[0] <= bx1
        assert by0 <= comp.centroid[1] <= by1


def make_component(label, area, centroid_x, min_x=0):
    pts = np.zeros((area, 2), dtype=int)
    return Component(
        label=label,
        area=area,
        bbox=(min_x, 0, min_x + 1, 1),
        centroid=(float(centroid_x), 0.0),
        pixels=pts,
    )


class TestSelection:
    def test_lung_two_largest_left_right(self):
        comps = [
            make_component(1, 50, 20),
            make_component(2, 30, 60),
            make_component(3, 5, 40),
        ]
        left, right = select_lung_components(comps)
        assert left.area == 50 and left.centroid[0] == 20
        assert right.area == 30 and right.centroid[0] == 60

    def test_lung_equal_area_order(self):
        comps = [make_component(1, 10, 40), make_component(2, 10, 10)]
        left, right = select_lung_components(comps)
        assert left.centroid[0] == 10
        assert right.centroid[0] == 40

    def test_lung_too_few(self):
        with pytest.raises(TooFewComponentsError):
            select_lung_components([make_component(1, 10, 5)])

    def test_heart_center_rule(self):
        near_center = make_component(1, 100, 50)
        big_corner = make_component(2, 120, 5)
        near_center = Component(1, 100, (45, 45, 55, 55), (50.0, 50.0), near_center.pixels)
        big_corner = Component(2, 120, (0, 0, 10, 10), (5.0, 5.0), big_corner.pixels)
        chosen = select_heart_component([near_center, big_corner], 100, 100, 0.005)
        assert chosen.label == 1

    def test_heart_single_candidate(self):
        comp = make_component(1, 200, 30)
        assert select_heart_component([comp], 100, 100, 0.01) is comp

    def test_heart_none_qualify(self):
        comps = [make_component(1, 5, 50), make_component(2, 9, 50)]
        with pytest.raises(NoQualifyingComponentError):
            select_heart_component(comps, 100, 100, 0.01)

    def test_heart_frac_validation(self):
        with pytest.raises(ValueError):
            select_heart_component([make_component(1, 50, 1)], 10, 10, 0.0)
