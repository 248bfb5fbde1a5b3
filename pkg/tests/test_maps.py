from __future__ import annotations

import json

import numpy as np
import pytest

from unimodal_coords.maps import (DomainError, MapError, UnimodalMap, evaluate, evaluate_array,
                                  invert_branch, invert_pair, iterate, load_map_spec, logistic_map,
                                  make_map, map_to_spec, orbit, parse_map_arg, piecewise_linear_map,
                                  sine_map, skew_tent_map, tent_map, validate)
from unimodal_coords.verification import EXAMPLE_PROFILE, builtin_maps


class TestConstruction:
    def test_skew_half_is_tent(self):
        t = np.linspace(0, 1, 1001)
        assert np.array_equal(evaluate_array(make_map("skew_tent", v=0.5), t), evaluate_array(tent_map(), t))

    def test_skew_third_peak(self):
        assert make_map("skew_tent", v=1 / 3)(1 / 3) == 1.0

    @pytest.mark.parametrize("v", [0.0, 1.0, -0.5, 1.5])
    def test_v_out_of_range(self, v):
        with pytest.raises(MapError, match="critical point out of range"):
            make_map("skew_tent", v=v)

    def test_unknown_kind(self):
        with pytest.raises(MapError, match="unknown"):
            make_map("cubic")

    def test_piecewise_linear_rejects_bad_profile(self):
        with pytest.raises(MapError, match="exactly one interior"):
            piecewise_linear_map([(0, 0), (0.5, 0.9), (1, 0)])
        with pytest.raises(MapError, match="increase strictly"):
            piecewise_linear_map([(0, 0), (0.3, 0.8), (0.2, 1), (1, 0)])

    def test_generic_bad_endpoint_fails_validation(self):
        f = lambda t: 1 - abs(1 - 2 * t)  # noqa: E731
        g = UnimodalMap(0.5, f, lambda t: 0.1 + 0.9 * f(t), kind="generic")
        report = validate(g)
        assert not report.passed
        assert [e.name for e in report.failures()] == ["g(1) = 0"]
        with pytest.raises(MapError, match="g\\(1\\) = 0"):
            make_map("generic", left=g.left_branch, right=g.right_branch, v=0.5)

    @pytest.mark.parametrize("g", [tent_map(), skew_tent_map(0.9), logistic_map(), sine_map(),
                                   piecewise_linear_map(EXAMPLE_PROFILE)], ids=lambda g: g.describe())
    def test_builtins_validate(self, g):
        assert validate(g).passed

    def test_spec_round_trip(self, tmp_path):
        for g in builtin_maps().values():
            path = tmp_path / "map.json"
            path.write_text(json.dumps(map_to_spec(g)))
            h = load_map_spec(path)
            t = np.linspace(0, 1, 257)
            assert np.array_equal(evaluate_array(g, t), evaluate_array(h, t))

    def test_parse_map_arg(self):
        assert parse_map_arg("skew_tent:0.3").v == 0.3
        assert parse_map_arg("skew_tent", v=0.25).v == 0.25
        assert parse_map_arg("logistic").kind == "logistic"
        with pytest.raises(MapError):
            parse_map_arg("skew_tent")
        with pytest.raises(MapError):
            parse_map_arg("tent:0.2")


class TestEvaluate:
    def test_examples(self):
        assert evaluate(tent_map(), 0.25) == 0.5
        assert evaluate(skew_tent_map(1 / 3), 1 / 3) == 1.0
        assert evaluate(logistic_map(), 0.5) == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            evaluate(tent_map(), 1.5)
        with pytest.raises(DomainError):
            evaluate_array(tent_map(), np.array([0.2, -0.1]))

    def test_range_on_random_points(self):
        t = np.random.default_rng(0).random(10_000)
        for g in builtin_maps().values():
            y = evaluate_array(g, t)
            assert y.min() >= 0.0 and y.max() <= 1.0

    def test_iterate(self):
        assert iterate(tent_map(), 1 / 3, 2) == pytest.approx(2 / 3, abs=1e-15)
        assert iterate(logistic_map(), 0.37, 0) == 0.37
        assert iterate(skew_tent_map(1 / 3), 1 / 9, 2) == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(ValueError):
            iterate(tent_map(), 0.5, -1)

    def test_orbit(self):
        assert orbit(tent_map(), 0.625, 5) == [0.625, 0.75, 0.5, 1.0, 0.0, 0.0]


class TestInversion:
    def test_examples(self):
        assert invert_branch(tent_map(), "left", 0.5) == 0.25
        assert invert_branch(skew_tent_map(1 / 3), "right", 1 / 3) == pytest.approx(7 / 9, abs=1e-15)
        for g in builtin_maps().values():
            assert invert_branch(g, "left", 1.0) == g.v
            assert invert_branch(g, "right", 1.0) == g.v

    def test_bad_side(self):
        with pytest.raises(ValueError):
            invert_branch(tent_map(), "up", 0.5)

    def test_round_trip(self):
        y = np.random.default_rng(1).random(1000)
        for g in [*builtin_maps().values(), sine_map()]:
            for side in ("left", "right"):
                x = invert_branch(g, side, y)
                assert np.max(np.abs(evaluate_array(g, x) - y)) <= 1e-11

    def test_analytic_matches_bisection(self):
        y = np.random.default_rng(2).random(1000)
        for g in builtin_maps().values():
            for side in ("left", "right"):
                a = invert_branch(g, side, y, method="analytic")
                b = invert_branch(g, side, y, method="bisect")
                assert np.max(np.abs(a - b)) <= 1e-11

    def test_scalar_matches_array(self):
        y = np.random.default_rng(3).random(50)
        for g in builtin_maps().values():
            for side in ("left", "right"):
                arr = invert_branch(g, side, y)
                assert [invert_branch(g, side, float(s)) for s in y] == list(arr)

    def test_pair_keeps_complement(self):
        g = logistic_map()
        c = 1e-20  # y = 1 - c rounds to 1.0, yet the pair still resolves x
        x, cx = invert_pair(g, "left", 1.0 - c, c)
        assert x < 0.5
        assert 0.5 - x == pytest.approx(0.5 * np.sqrt(c), rel=1e-6)
        assert x + cx == pytest.approx(1.0, abs=1e-16)
