import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import exterior_shell_points
from potlab.errors import DomainError
from potlab.field import (
    FieldSamples,
    PotentialField,
    asymptotic_fit,
    ball_oracle_sample,
    sample_field,
)
from potlab.mesh import Ball, make_shape
from potlab.solver import solve_density


class TestBallOracleSample:
    def test_closed_forms_at_two(self):
        s = ball_oracle_sample(1.0, (2.0, 0.0, 0.0))
        assert s.u == pytest.approx(0.5)
        assert np.allclose(s.grad, (-0.25, 0.0, 0.0))
        assert s.speed == pytest.approx(0.25)
        assert s.H == pytest.approx(1.0)  # 2/r at r = 2

    def test_conformal_quantities_constant(self, rng):
        # |Du|/u^2 = 1/R and P = 1/R^2 at every exterior point
        radius = 1.7
        for _ in range(5):
            x = rng.normal(size=3)
            x *= rng.uniform(2.0, 8.0) / np.linalg.norm(x)
            s = ball_oracle_sample(radius, x)
            assert s.conf_speed == pytest.approx(1.0 / radius, rel=1e-12)
            assert s.P == pytest.approx(1.0 / radius**2, rel=1e-12)
            assert s.H_conf == pytest.approx(0.0, abs=1e-12)

    def test_inside_rejected(self):
        with pytest.raises(DomainError):
            ball_oracle_sample(1.0, (0.5, 0.0, 0.0))

    def test_harmonic(self):
        s = ball_oracle_sample(1.0, (1.3, -0.4, 0.8))
        assert abs(np.trace(s.hess)) < 1e-12 * np.linalg.norm(s.hess)


class TestDerivedFieldAlgebra:
    @settings(deadline=None, max_examples=50)
    @given(
        u=st.floats(1e-3, 1.0 - 1e-9),
        gx=st.floats(-2.0, 2.0),
        gy=st.floats(-2.0, 2.0),
        gz=st.floats(0.1, 2.0),
    )
    def test_pointwise_identities(self, u, gx, gy, gz):
        grad = np.array([[gx, gy, gz]])
        hess = np.zeros((1, 3, 3))
        samples = FieldSamples(np.zeros((1, 3)), np.array([u]), grad, hess, 0.0)
        s = samples[0]
        assert s.phi == -math.log(u)
        assert s.conf_speed == s.speed / u**2
        assert s.P == s.conf_speed**2

    def test_speed_cutoff_flags(self):
        grad = np.array([[1e-12, 0.0, 0.0], [1.0, 0.0, 0.0]])
        hess = np.zeros((2, 3, 3))
        samples = FieldSamples(np.zeros((2, 3)), np.array([0.5, 0.5]), grad,
                               hess, 1e-6)
        assert not samples.curvature_ok[0]
        assert samples.curvature_ok[1]
        assert math.isnan(samples[0].H)


class TestSampleField:
    def test_ball_sample_at_two(self, ball4_field):
        s = sample_field(ball4_field, np.array([2.0, 0.0, 0.0]))
        assert s.u == pytest.approx(0.5, rel=0.005)
        assert s.speed == pytest.approx(0.25, rel=0.005)
        assert s.H == pytest.approx(1.0, rel=0.005)

    def test_ball_conformal_curvature_vanishes(self, ball4_field, rng):
        pts = exterior_shell_points(ball4_field.mesh, 10, rng)
        samples = ball4_field.sample_many(pts)
        assert np.abs(samples.H_conf).max() < 5e-3

    def test_matches_oracle_everywhere(self, ball4_field, rng):
        pts = exterior_shell_points(ball4_field.mesh, 20, rng)
        samples = ball4_field.sample_many(pts)
        for i, x in enumerate(pts):
            oracle = ball_oracle_sample(1.0, x)
            assert samples.u[i] == pytest.approx(oracle.u, rel=0.01)
            assert samples.speed[i] == pytest.approx(oracle.speed, rel=0.01)
            assert samples.H[i] == pytest.approx(oracle.H, rel=0.01)
            assert samples.P[i] == pytest.approx(oracle.P, rel=0.01)
            assert samples.phi[i] == pytest.approx(oracle.phi, rel=0.01)
            assert samples.conf_speed[i] == pytest.approx(oracle.conf_speed, rel=0.01)
            assert samples.H_conf[i] == pytest.approx(oracle.H_conf, abs=0.01)
            assert np.allclose(samples.grad[i], oracle.grad, rtol=0.01,
                               atol=0.002 * oracle.speed)
            assert np.allclose(samples.hess[i], oracle.hess, rtol=0.01,
                               atol=0.01 * np.linalg.norm(oracle.hess))

    def test_harmonicity(self, ball3_field, rng):
        pts = exterior_shell_points(ball3_field.mesh, 20, rng)
        samples = ball3_field.sample_many(pts)
        traces = np.abs(np.trace(samples.hess, axis1=1, axis2=2))
        norms = np.linalg.norm(samples.hess, axis=(1, 2))
        assert np.all(traces <= 1e-8 * norms)

    def test_gradient_matches_finite_differences(self, ball3_field, rng):
        pts = exterior_shell_points(ball3_field.mesh, 20, rng)
        step = 1e-5 * ball3_field.mesh.diameter
        _, grad, hess = ball3_field.evaluate(pts, order=2)
        for axis in range(3):
            offset = np.zeros(3)
            offset[axis] = step
            u_p, g_p, _ = ball3_field.evaluate(pts + offset, order=2)
            u_m, g_m, _ = ball3_field.evaluate(pts - offset, order=2)
            fd_grad = (u_p - u_m) / (2 * step)
            assert np.abs(fd_grad - grad[:, axis]).max() <= \
                1e-5 * np.linalg.norm(grad, axis=1).max()
            fd_hess = (g_p - g_m) / (2 * step)
            assert np.abs(fd_hess - hess[:, axis, :]).max() <= \
                1e-5 * np.linalg.norm(hess, axis=(1, 2)).max()

    def test_interior_point_rejected(self, ball3_field):
        with pytest.raises(DomainError, match="inside"):
            ball3_field.sample(np.array([0.1, 0.2, 0.0]))

    def test_exterior_classification(self, ball3_field, rng):
        inside = rng.normal(size=(10, 3))
        inside *= rng.uniform(0.1, 0.8, size=10)[:, None] / np.linalg.norm(inside, axis=1)[:, None]
        outside = inside * 10.0
        assert not ball3_field.is_exterior(inside).any()
        assert ball3_field.is_exterior(outside).all()

    def test_capacity_cache_consistency(self, ball3_field):
        from potlab.solver import capacity

        recomputed = capacity(ball3_field.density).value
        assert ball3_field.capacity.value == pytest.approx(recomputed, rel=1e-13)


class TestAsymptoticFit:
    def test_ball(self, ball3_field):
        assert abs(asymptotic_fit(ball3_field) - ball3_field.capacity.value) < 1e-3

    def test_matches_capacity_on_ellipsoid(self, ell3_field):
        fit = asymptotic_fit(ell3_field)
        assert abs(fit / ell3_field.capacity.value - 1.0) < 0.01

    def test_scaling(self):
        mesh = make_shape(Ball(1.0), 2)
        fit1 = asymptotic_fit(PotentialField(solve_density(mesh)))
        fit2 = asymptotic_fit(PotentialField(solve_density(mesh.scaled(1.7))))
        assert fit2 == pytest.approx(1.7 * fit1, rel=1e-9)
