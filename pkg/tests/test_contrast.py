import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crawlcontrast.colors import RgbaColor
from crawlcontrast.contrast import (
    ContrastResult,
    assess,
    contrast_ratio,
    linearize_channel,
    relative_luminance,
)

BLACK = RgbaColor(0, 0, 0)
WHITE = RgbaColor(255, 255, 255)


# --- independent brute-force oracle (kept separate from the implementation) ---

def _oracle_linear(c8: int) -> float:
    v = c8 / 255
    if v <= 0.03928:
        return v / 12.92
    return math.pow((v + 0.055) / 1.055, 2.4)


def _oracle_luminance(rgb: tuple[int, int, int]) -> float:
    return math.fsum(w * _oracle_linear(c) for w, c in zip((0.2126, 0.7152, 0.0722), rgb))


def _oracle_ratio(rgb_a: tuple[int, int, int], rgb_b: tuple[int, int, int]) -> float:
    lighter, darker = sorted((_oracle_luminance(rgb_a), _oracle_luminance(rgb_b)), reverse=True)
    return (lighter + 0.05) / (darker + 0.05)


channels = st.integers(min_value=0, max_value=255)
colors = st.builds(RgbaColor, channels, channels, channels)


class TestLinearize:
    def test_endpoints(self):
        assert linearize_channel(0) == 0.0
        assert linearize_channel(255) == 1.0

    def test_known_value_119(self):
        # direct evaluation of the piecewise formula at 119/255
        assert linearize_channel(119) == pytest.approx(0.184474994500441, abs=1e-12)
        assert linearize_channel(119) == pytest.approx(0.18447, abs=1e-3)

    def test_low_branch(self):
        # 8/255 ~= 0.0314 is below the 0.03928 breakpoint
        assert linearize_channel(8) == pytest.approx((8 / 255) / 12.92, abs=1e-15)

    def test_monotone_nondecreasing(self):
        values = [linearize_channel(c) for c in range(256)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            linearize_channel(256)


class TestLuminance:
    def test_white_is_one(self):
        assert relative_luminance(WHITE) == 1.0

    def test_black_is_zero(self):
        assert relative_luminance(BLACK) == 0.0

    def test_pure_red_isolates_coefficient(self):
        assert relative_luminance(RgbaColor(255, 0, 0)) == pytest.approx(0.2126, abs=1e-15)

    def test_css_green(self):
        # oracle: 0.7152 * linear(128)
        lum = relative_luminance(RgbaColor(0, 128, 0))
        assert lum == pytest.approx(0.15438342968146074, abs=1e-12)
        assert lum == pytest.approx(0.15438, abs=1e-3)

    def test_alpha_is_ignored(self):
        assert relative_luminance(RgbaColor(10, 20, 30, 0.5)) == relative_luminance(
            RgbaColor(10, 20, 30)
        )


class TestContrastRatio:
    def test_black_white_exactly_21(self):
        assert contrast_ratio(BLACK, WHITE) == 21.0

    def test_identical_pair_is_one(self):
        for color in (BLACK, WHITE, RgbaColor(119, 119, 119), RgbaColor(13, 200, 7)):
            assert contrast_ratio(color, color) == 1.0

    def test_red_on_white(self):
        ratio = contrast_ratio(RgbaColor(255, 0, 0), WHITE)
        assert ratio == pytest.approx(3.9984767707539985, abs=1e-12)
        assert ratio == pytest.approx(3.998, abs=1e-3)

    def test_777_on_white(self):
        ratio = contrast_ratio(RgbaColor(119, 119, 119), WHITE)
        assert ratio == pytest.approx(4.478089453577214, abs=1e-12)
        assert ratio == pytest.approx(4.478, abs=1e-3)

    def test_oracle_equivalence_1000_seeded_pairs(self):
        rng = random.Random(610)
        for _ in range(1000):
            a = (rng.randrange(256), rng.randrange(256), rng.randrange(256))
            b = (rng.randrange(256), rng.randrange(256), rng.randrange(256))
            got = contrast_ratio(RgbaColor(*a), RgbaColor(*b))
            assert got == pytest.approx(_oracle_ratio(a, b), abs=1e-9)

    @settings(max_examples=300, deadline=None)
    @given(colors, colors)
    def test_symmetry(self, a, b):
        assert contrast_ratio(a, b) == contrast_ratio(b, a)

    @settings(max_examples=300, deadline=None)
    @given(colors, colors)
    def test_range(self, a, b):
        assert 1.0 <= contrast_ratio(a, b) <= 21.0

    @settings(max_examples=200, deadline=None)
    @given(st.lists(channels, min_size=3, max_size=3, unique=True))
    def test_greyscale_monotonicity(self, greys):
        g1, g2, g3 = sorted(greys)
        c1, c2, c3 = (RgbaColor(g, g, g) for g in (g1, g2, g3))
        assert contrast_ratio(c1, c3) >= contrast_ratio(c1, c2)


class TestAssess:
    def test_black_white_passes_both(self):
        result = assess(BLACK, WHITE)
        assert result == ContrastResult(ratio=21.0, passes_normal=True, passes_large=True)

    def test_777_fails_normal_passes_large(self):
        result = assess(RgbaColor(119, 119, 119), WHITE)
        assert result.ratio == pytest.approx(4.478, abs=1e-3)
        assert not result.passes_normal
        assert result.passes_large

    def test_identical_red_fails_both(self):
        red = RgbaColor(255, 0, 0)
        result = assess(red, red)
        assert result.ratio == 1.0
        assert not result.passes_normal
        assert not result.passes_large

    @settings(max_examples=300, deadline=None)
    @given(colors, colors)
    def test_normal_implies_large(self, a, b):
        result = assess(a, b)
        if result.passes_normal:
            assert result.passes_large

    @settings(max_examples=200, deadline=None)
    @given(colors, colors)
    def test_thresholds_use_unrounded_ratio(self, a, b):
        result = assess(a, b)
        assert result.passes_normal == (result.ratio >= 4.5)
        assert result.passes_large == (result.ratio >= 3.0)
