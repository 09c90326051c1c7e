import math

import numpy as np
import pytest

from conftest import ACCEPT_T_GRID
from potlab.levelset import extract_level
from potlab.monotone import (
    build_profile,
    build_profiles,
    compute_Phi,
    compute_Phi_prime,
    compute_Up,
    compute_Up_prime,
    derivative_scale,
    limit_value,
    write_profile_csv,
)
from potlab.oracle import ball_Up


class TestComputeUp:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_ball_constant_value(self, ball3_field, ball3_levels, p):
        oracle = ball_Up(1.0, p).value
        for level in ball3_levels:
            value = compute_Up(ball3_field, level, p)
            assert abs(value / oracle - 1.0) < 0.02

    def test_flux_moment_is_level_independent(self, ell3_field, ell3_levels):
        values = [compute_Up(ell3_field, lv, 1.0) for lv in ell3_levels]
        spread = (max(values) - min(values)) / np.mean(values)
        assert spread < 0.01
        want = 4 * math.pi * ell3_field.capacity.value
        assert np.mean(values) == pytest.approx(want, rel=0.01)

    def test_zeroth_moment(self, ball3_field, ball3_levels):
        # p = 0: [Cap/t]^-2 times the level area; radius-2 sphere gives 4 pi
        level = ball3_levels[3]
        value = compute_Up(ball3_field, level, 0.0)
        assert value == pytest.approx(4 * math.pi, rel=0.02)

    def test_negative_exponent_rejected(self, ball3_field, ball3_levels):
        with pytest.raises(ValueError):
            compute_Up(ball3_field, ball3_levels[0], -1.0)


class TestComputeUpPrime:
    def test_ball_derivative_vanishes(self, ball3_field, ball3_levels):
        for p in (1.5, 2.0, 3.0):
            for level in ball3_levels:
                value = compute_Up_prime(ball3_field, level, p)
                scale = derivative_scale(ball3_field, level, p)
                assert abs(value) < 0.02 * scale

    def test_ellipsoid_monotone(self, ell3_field, ell3_levels):
        for p in (1.5, 2.0, 3.0, 5.0):
            for level in ell3_levels:
                value = compute_Up_prime(ell3_field, level, p)
                scale = derivative_scale(ell3_field, level, p)
                assert value >= -0.01 * scale

    def test_below_range_rejected(self, ball3_field, ball3_levels):
        with pytest.raises(ValueError, match="1.5"):
            compute_Up_prime(ball3_field, ball3_levels[0], 1.2)


class TestComputePhi:
    def test_ball_reference(self, ball3_field, ball3_levels):
        # 4 pi R^(2-p), independent of the level
        for p in (0.0, 1.0, 2.0, 3.0):
            values = [compute_Phi(ball3_field, lv, p) for lv in ball3_levels]
            assert np.allclose(values, 4 * math.pi, rtol=0.02)

    def test_flux_moment_constant(self, ell3_field, ell3_levels):
        values = [compute_Phi(ell3_field, lv, 1.0) for lv in ell3_levels]
        assert (max(values) - min(values)) / np.mean(values) < 0.01


class TestBridges:
    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_moment_bridge(self, ell3_field, ell3_levels, p):
        cap = ell3_field.capacity.value
        for level in ell3_levels:
            lhs = compute_Up(ell3_field, level, p)
            rhs = cap ** (2.0 * (p - 1.0)) * compute_Phi(ell3_field, level, p)
            assert abs(lhs / rhs - 1.0) < 1e-9

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_derivative_bridge(self, ell3_field, ell3_levels, p):
        cap = ell3_field.capacity.value
        for level in ell3_levels:
            lhs = -level.t * compute_Up_prime(ell3_field, level, p)
            rhs = cap ** (2.0 * (p - 1.0)) * compute_Phi_prime(ell3_field, level, p)
            scale = level.t * compute_Up_prime(ell3_field, level, p) \
                + derivative_scale(ell3_field, level, p)
            assert abs(lhs - rhs) <= 1e-9 * abs(scale)

    def test_conformal_derivative_nonpositive(self, ell3_field, ell3_levels):
        for level in ell3_levels:
            value = compute_Phi_prime(ell3_field, level, 3.0)
            scale = derivative_scale(ell3_field, level, 3.0)
            assert value <= 0.01 * scale


class TestProfiles:
    def test_ball_profile(self, ball3_field, ball3_levels):
        profile = build_profile(ball3_field, 2.0, ACCEPT_T_GRID,
                                levels=ball3_levels)
        assert np.allclose(profile.U, 4 * math.pi, rtol=0.02)
        assert profile.limit == pytest.approx(
            4 * math.pi * ball3_field.capacity.value**2)
        assert profile.limit_ok
        scale = derivative_scale(ball3_field, ball3_levels[0], 2.0)
        assert abs(profile.min_U_prime) < 0.02 * scale

    def test_derivative_vs_finite_differences(self, ell3_field, ell3_levels):
        for p in (2.0, 3.0):
            profile = build_profile(ell3_field, p, ACCEPT_T_GRID,
                                    levels=ell3_levels)
            for k in range(1, len(ACCEPT_T_GRID) - 1):
                scale = derivative_scale(ell3_field, ell3_levels[k], p)
                gap = abs(profile.U_prime[k] - profile.U_prime_fd[k])
                assert gap <= 0.05 * max(abs(profile.U_prime[k]), scale)

    def test_limit_attained_from_below(self, ell3_field):
        # the gap above the small-level limit shrinks as t decreases
        # (monotone up to the quadrature noise floor of ~1e-4 relative)
        values = []
        for t in (0.2, 0.1, 0.05):
            level = extract_level(ell3_field, t, resolution=64)
            values.append(compute_Up(ell3_field, level, 3.0))
        limit = limit_value(ell3_field, 3.0)
        noise = 3e-3 * limit  # area-faceting floor at resolution 64
        gaps = [v - limit for v in values]
        assert gaps[1] <= gaps[0] + noise
        assert gaps[2] <= gaps[1] + noise
        assert all(g >= -noise for g in gaps)
        assert values[2] == pytest.approx(limit, rel=0.01)

    def test_unit_exponent_has_zero_derivative(self, ball3_field, ball3_levels):
        profile = build_profile(ball3_field, 1.0, ACCEPT_T_GRID,
                                levels=ball3_levels)
        assert np.all(profile.U_prime == 0.0)

    def test_sub_range_exponent_has_nan_derivative(self, ball3_field, ball3_levels):
        profile = build_profile(ball3_field, 0.5, ACCEPT_T_GRID,
                                levels=ball3_levels)
        assert np.all(np.isnan(profile.U_prime))

    def test_shared_levels_across_exponents(self, ball3_field, ball3_levels):
        profiles = build_profiles(ball3_field, [1.5, 2.0], ACCEPT_T_GRID,
                                  levels=ball3_levels)
        assert set(profiles) == {1.5, 2.0}

    def test_grid_validation(self, ball3_field):
        with pytest.raises(Exception, match="at least 5"):
            build_profile(ball3_field, 2.0, (0.3, 0.5, 0.7))
        with pytest.raises(Exception, match=r"\(0, 1\]"):
            build_profile(ball3_field, 2.0, (0.0, 0.2, 0.4, 0.6, 0.8))


class TestCsv:
    def test_roundtrip_and_determinism(self, ball3_field, ball3_levels, tmp_path):
        profile = build_profile(ball3_field, 2.0, ACCEPT_T_GRID,
                                levels=ball3_levels)
        path_a = tmp_path / "a.csv"
        path_b = tmp_path / "b.csv"
        write_profile_csv(profile, path_a, "test run")
        write_profile_csv(profile, path_b, "test run")
        assert path_a.read_bytes() == path_b.read_bytes()
        lines = path_a.read_text().splitlines()
        assert lines[1] == "t,s,U,U_prime,U_prime_fd,Phi,skipped_fraction"
        first = lines[2].split(",")
        assert float(first[0]) == ACCEPT_T_GRID[0]
        assert float(first[1]) == pytest.approx(-math.log(ACCEPT_T_GRID[0]))
