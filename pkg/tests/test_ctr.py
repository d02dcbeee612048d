import numpy as np
import pytest

from ctrkit.core import BitMask
from ctrkit.ctr import (
    CARDIOMEGALY,
    FLAG_NEGATIVE_MLD,
    FLAG_NEGATIVE_MRD,
    MILD,
    NORMAL,
    CtrThresholds,
    category_rank,
    classify,
    measure_ctr,
    scale_measurement,
)
from ctrkit.errors import ZeroThoracicWidthError
from ctrkit.morphology import connected_components


def strip_mask(h, w, x0, x1, y):
    arr = np.zeros((h, w), dtype=np.uint8)
    arr[y, x0:x1 + 1] = 1
    return arr


def components_for(heart_extent, lung_extent, size=320):
    hx0, hx1 = heart_extent
    lx0, lx1 = lung_extent
    lung_bits = strip_mask(size, size, lx0, lx0 + 10, 100) | strip_mask(
        size, size, lx1 - 10, lx1, 100
    )
    heart_bits = strip_mask(size, size, hx0, hx1, 200)
    lungs = connected_components(BitMask(lung_bits))
    heart = connected_components(BitMask(heart_bits))[0]
    left = min(lungs, key=lambda c: c.centroid[0])
    right = max(lungs, key=lambda c: c.centroid[0])
    return heart, left, right


class TestMeasure:
    def test_hand_geometry(self):
        heart, left, right = components_for((100, 220), (40, 280))
        m = measure_ctr(heart, left, right)
        assert m.mrd_len + m.mld_len == 120
        assert m.id_len == 240
        assert m.ctr == 0.5
        assert m.midline_x == 160
        assert m.mrd_len == 60
        assert m.mld_len == 60
        assert m.flags == frozenset()

    def test_heart_equals_lung_extent(self):
        heart, left, right = components_for((40, 280), (40, 280))
        m = measure_ctr(heart, left, right)
        assert m.ctr == 1.0

    def test_ctr_058_is_cardiomegaly(self):
        # ID 200, heart width 116 -> CTR 0.58
        heart, left, right = components_for((101, 217), (50, 250))
        m = measure_ctr(heart, left, right)
        assert m.ctr == 0.58
        assert m.category == CARDIOMEGALY
        assert m.detection is True

    def test_negative_mrd_flagged_not_clamped(self):
        # heart entirely right of the midline (160)
        heart, left, right = components_for((200, 260), (40, 280))
        m = measure_ctr(heart, left, right)
        assert m.mrd_len == -40
        assert m.mld_len == 100
        assert m.mrd_len + m.mld_len == 60  # still the heart x-extent
        assert FLAG_NEGATIVE_MRD in m.flags
        assert FLAG_NEGATIVE_MLD not in m.flags

    def test_sum_identity_random_masks(self):
        rng = np.random.default_rng(20)
        for _ in range(1000):
            hx0 = int(rng.integers(0, 150))
            hx1 = int(rng.integers(hx0, 319))
            lx0 = int(rng.integers(0, 120))
            lx1 = int(rng.integers(lx0 + 30, 320))
            heart, left, right = components_for((hx0, hx1), (lx0, lx1))
            m = measure_ctr(heart, left, right)
            assert m.mrd_len + m.mld_len == hx1 - hx0
            assert abs(m.ctr - (m.mrd_len + m.mld_len) / m.id_len) < 1e-12

    def test_zero_thoracic_width(self):
        size = 64
        bits = strip_mask(size, size, 30, 30, 10)
        comps = connected_components(BitMask(bits | strip_mask(size, size, 30, 30, 40)))
        heart, *_ = components_for((10, 20), (5, 60))
        with pytest.raises(ZeroThoracicWidthError):
            measure_ctr(heart, comps[0], comps[0])

    def test_segments_carry_extreme_ys(self):
        heart, left, right = components_for((100, 220), (40, 280))
        m = measure_ctr(heart, left, right)
        assert m.id.a.y == 100 and m.id.b.y == 100
        assert m.mrd.a.y == m.mrd.b.y == 200  # horizontal at heart extreme y
        assert m.mld.a.y == m.mld.b.y == 200
        assert m.id.a.x == 40 and m.id.b.x == 280


class TestClassify:
    def test_examples(self):
        assert classify(0.49) == (NORMAL, False)
        assert classify(0.52) == (MILD, True)
        assert classify(0.50) == (MILD, True)  # cutoff is inclusive
        assert classify(0.55) == (MILD, True)
        assert classify(0.56) == (CARDIOMEGALY, True)

    def test_monotone_in_ctr(self):
        rng = np.random.default_rng(21)
        values = sorted(rng.uniform(0.0, 1.0, size=200))
        ranks = [category_rank(classify(v)[0]) for v in values]
        assert all(a <= b for a, b in zip(ranks, ranks[1:]))

    def test_custom_thresholds(self):
        th = CtrThresholds(cutoff=0.45, mild_upper=0.6)
        assert classify(0.46, th) == (MILD, True)
        with pytest.raises(ValueError):
            CtrThresholds(cutoff=0.6, mild_upper=0.5)
        with pytest.raises(ValueError):
            classify(-0.1)


class TestScale:
    def test_identity(self):
        heart, left, right = components_for((100, 220), (40, 280))
        m = measure_ctr(heart, left, right)
        same = scale_measurement(m, (320, 320), (320, 320))
        assert same == m

    def test_uniform_upscale_doubles_lengths(self):
        heart, left, right = components_for((100, 220), (40, 280))
        m = measure_ctr(heart, left, right)
        big = scale_measurement(m, (512, 512), (1024, 1024))
        assert big.mrd_len == 120
        assert big.mld_len == 120
        assert big.id_len == 480
        assert abs(big.ctr - 0.5) < 1e-12

    def test_ctr_invariant_under_integer_upscale(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            size = 48
            arr_h = np.zeros((size, size), dtype=np.uint8)
            arr_l = np.zeros((size, size), dtype=np.uint8)
            hx0, hx1 = sorted(rng.integers(5, 43, size=2))
            arr_h[20:25, hx0:hx1 + 1] = 1
            arr_l[15:30, 2:12] = 1
            arr_l[15:30, 36:46] = 1
            k = int(rng.integers(2, 4))
            for heart_bits, lung_bits in [(arr_h, arr_l)]:
                lungs = connected_components(BitMask(lung_bits))
                heart = connected_components(BitMask(heart_bits))[0]
                m = measure_ctr(heart, lungs[0], lungs[1])
                big_h = np.kron(heart_bits, np.ones((k, k), dtype=np.uint8))
                big_l = np.kron(lung_bits, np.ones((k, k), dtype=np.uint8))
                lungs_k = connected_components(BitMask(big_l))
                heart_k = connected_components(BitMask(big_h))[0]
                mk = measure_ctr(heart_k, lungs_k[0], lungs_k[1])
                # extents scale as k*(x1-x0) + (k-1); CTR of strip masks is
                # invariant when widths are commensurate, here check ratio law
                assert mk.mrd_len + mk.mld_len == k * (m.mrd_len + m.mld_len) + (k - 1)
                assert mk.id_len == k * m.id_len + (k - 1)
