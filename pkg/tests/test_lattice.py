from __future__ import annotations

import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from unimodal_coords.lattice import (DepthError, DepthWarning, LocalizedInterval, delta_ratio,
                                     follow_bits, index_window, localize, preimage_level,
                                     refine_midpoint)
from unimodal_coords.maps import evaluate_array, iterate, logistic_map, sine_map, skew_tent_map, tent_map
from unimodal_coords.verification import builtin_maps


def exact_skew_level(v: Fraction, n: int) -> list[Fraction]:
    """Level ``n`` of ``f_v`` in rational arithmetic."""
    pts = {Fraction(0), Fraction(1)}
    for _ in range(n - 1):
        pts = {v * y for y in pts} | {1 - (1 - v) * y for y in pts}
    return sorted(pts)


class TestPreimageLevel:
    def test_small_levels(self):
        for g in builtin_maps().values():
            assert list(preimage_level(g, 1).points) == [0.0, 1.0]
            assert list(preimage_level(g, 2).points) == [0.0, g.v, 1.0]

    def test_skew_third_level3(self):
        pts = preimage_level(skew_tent_map(1 / 3), 3).points
        assert np.allclose(pts, [0, 1 / 9, 1 / 3, 7 / 9, 1], atol=1e-15)

    def test_tent_dyadic(self):
        for n in range(1, 13):
            pts = preimage_level(tent_map(), n).points
            assert np.array_equal(pts, np.arange(2 ** (n - 1) + 1) / 2 ** (n - 1))

    def test_logistic_sine_squared(self):
        for n in (3, 7, 12):
            pts = preimage_level(logistic_map(), n).points
            k = np.arange(len(pts))
            assert np.max(np.abs(pts - np.sin(np.pi * k / 2 ** n) ** 2)) <= 1e-15

    @pytest.mark.parametrize("v", [Fraction(1, 3), Fraction(1, 5), Fraction(7, 10)])
    def test_skew_rational_oracle(self, v):
        pts = preimage_level(skew_tent_map(float(v)), 10).points
        exact = exact_skew_level(v, 10)
        assert len(exact) == len(pts)
        assert max(abs(float(e) - p) for e, p in zip(exact, pts)) <= 1e-15

    def test_nesting_is_exact(self):
        for g in [*builtin_maps().values(), sine_map()]:
            a, b = preimage_level(g, 8).points, preimage_level(g, 9).points
            assert np.array_equal(b[0::2], a)

    def test_sorted_and_zeroed(self):
        for g in builtin_maps().values():
            level = preimage_level(g, 10)
            assert len(level) == 2 ** 9 + 1
            assert np.all(np.diff(level.points) > 0)
            y = level.points
            for _ in range(10):
                y = evaluate_array(g, y)
            assert np.max(np.abs(y)) <= 1e-9

    def test_cap(self):
        with pytest.raises(DepthError):
            preimage_level(tent_map(), 21)
        with pytest.raises(DepthError):
            preimage_level(tent_map(), 0)

    def test_json(self):
        assert preimage_level(tent_map(), 2).to_json() == {"n": 2, "points": [0.0, 0.5, 1.0]}


class TestMidpoints:
    def test_examples(self):
        assert refine_midpoint(tent_map(), 1, 0, 0.0, 0.5) == 0.25
        assert refine_midpoint(skew_tent_map(1 / 3), 1, 0, 0.0, 1 / 3) == pytest.approx(1 / 9, abs=1e-16)
        for g in builtin_maps().values():
            assert refine_midpoint(g, 0, 0, 0.0, 1.0) == g.v

    def test_strategies_agree(self):
        for g in builtin_maps().values():
            path = localize(g, 0.41, 14, strategy="B")
            for c in path.intervals:
                a = refine_midpoint(g, c.n, c.k, c.left, c.right, strategy="A")
                assert abs(a - c.midpoint) <= 1e-10

    def test_midpoint_maps_to_v(self):
        g = logistic_map()
        for c in localize(g, 0.123, 12).intervals:
            assert abs(iterate(g, c.midpoint, c.n) - g.v) <= 1e-12

    def test_bad_index(self):
        with pytest.raises(ValueError):
            refine_midpoint(tent_map(), 2, 4)

    def test_strategy_a_needs_endpoints(self):
        with pytest.raises(ValueError):
            refine_midpoint(tent_map(), 1, 0, strategy="A")

    def test_delta_examples(self):
        g = skew_tent_map(1 / 3)
        left_cell = LocalizedInterval(1, 0, 0.0, 1 / 3, refine_midpoint(g, 1, 0), 0)
        right_cell = LocalizedInterval(1, 1, 1 / 3, 1.0, refine_midpoint(g, 1, 1), 0)
        assert delta_ratio(left_cell) == pytest.approx(1 / 3, abs=1e-15)
        assert delta_ratio(right_cell) == pytest.approx(2 / 3, abs=1e-15)
        for c in localize(tent_map(), 0.3, 20).intervals:
            assert c.delta == 0.5

    def test_zero_length_delta(self):
        with pytest.raises(DepthError):
            delta_ratio(LocalizedInterval(3, 0, 0.5, 0.5, 0.5, 0))


class TestLocalize:
    def test_tent_five_eighths(self):
        path = localize(tent_map(), 5 / 8, 4)
        assert path.bits[:4] == (1, 0, 0, 1)
        assert path.ks[1:] == (1, 2, 4, 9)

    def test_zero(self):
        for g in builtin_maps().values():
            path = localize(g, 0.0, 30)
            assert set(path.ks) == {0}
            assert path.tail == 0

    def test_skew_third(self):
        path = localize(skew_tent_map(1 / 3), 1 / 3, 2)
        (l1, r1), (l2, r2) = [(c.left, c.right) for c in path.intervals[1:]]
        assert (l1, r1) == (0.0, 1 / 3)
        assert l2 == pytest.approx(1 / 9, abs=1e-16) and r2 == 1 / 3
        assert [c.length for c in path.intervals[1:]] == pytest.approx([1 / 3, 2 / 9], abs=1e-16)
        assert path.tail == 1

    def test_matches_full_lattice(self):
        rng = np.random.default_rng(5)
        for g in builtin_maps().values():
            levels = {n: preimage_level(g, n).points for n in range(1, 13)}
            for x in rng.random(20):
                for c in localize(g, float(x), 10).intervals:
                    pts = levels[c.n + 1]
                    assert abs(pts[c.k] - c.left) <= 1e-10 and abs(pts[c.k + 1] - c.right) <= 1e-10
                    assert abs(levels[c.n + 2][2 * c.k + 1] - c.midpoint) <= 1e-10

    def test_nested_and_contains(self):
        rng = np.random.default_rng(6)
        for g in builtin_maps().values():
            for x in rng.random(10):
                path = localize(g, float(x), 40)
                assert not path.truncated
                prev = None
                for c in path.intervals:
                    assert c.left <= x <= c.right
                    assert c.left < c.midpoint < c.right
                    if prev is not None:
                        assert prev.left <= c.left and c.right <= prev.right
                        assert c.length <= prev.length
                        assert c.k == 2 * prev.k + prev.bit
                    prev = c

    def test_ties_go_left(self):
        path = localize(tent_map(), 0.5, 5)
        assert path.bits == (0, 1, 1, 1, 1, 1)
        assert path.tail == 1

    def test_strategy_a_deep(self):
        a = localize(logistic_map(), 0.3, 30, strategy="A")
        b = localize(logistic_map(), 0.3, 30, strategy="B")
        assert a.bits == b.bits

    def test_generic_map_uses_bisection(self):
        path = localize(sine_map(), 0.2, 20)
        assert not path.truncated
        assert path.intervals[-1].length < 1e-5

    def test_depth_bounds(self):
        with pytest.raises(DepthError):
            localize(tent_map(), 0.3, 65)
        with pytest.raises(ValueError):
            localize(tent_map(), 1.2, 3)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            localize(tent_map(), 0.3, 50)
        assert any(issubclass(w.category, DepthWarning) for w in caught)

    def test_follow_bits(self):
        path = follow_bits(tent_map(), [1, 0, 0, 1])
        assert path.ks == (0, 1, 2, 4)
        assert path.intervals[-1].right == 0.625

    def test_json_round_trip(self):
        import json
        data = json.loads(localize(tent_map(), 0.3, 3).dumps())
        assert [c["k"] for c in data["intervals"]] == [0, 0, 1, 2]


class TestIndexWindow:
    def test_examples(self):
        d = (0, 1, 0, 0, 1)
        assert index_window(d, 1, 4) == 9
        assert index_window(d, 0, 4) == 9
        assert all(index_window(d, i, i) == d[i] for i in range(5))
        assert index_window((0,) * 6, 2, 5) == 0

    def test_range(self):
        with pytest.raises(IndexError):
            index_window((0, 1), 1, 3)

    def test_matches_localize(self):
        path = localize(logistic_map(), 0.77, 12)
        d = (0, *path.bits)
        for c in path.intervals:
            assert index_window(d, 0, c.n) == c.k


def test_lengths_shrink_geometrically_for_tent():
    for c in localize(tent_map(), 1 / math.pi, 30).intervals:
        assert c.length == 2.0 ** -c.n
