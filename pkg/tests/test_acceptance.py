"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one pass/fail line (run with ``pytest -s`` to see them all).
The level-surface criteria run on refinement-3 bodies with the default
auto-grid resolution; the capacity and boundary criteria run at refinement 4.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPT_T_GRID
from helpers import ELL_CAPACITY, exterior_shell_points
from potlab.cli import main
from potlab.field import PotentialField, asymptotic_fit, ball_oracle_sample
from potlab.inequalities import (
    capacity_ratio,
    check_cap_bounds,
    check_willmore,
    overdetermined_residual,
)
from potlab.levelset import boundary_level
from potlab.mesh import Ball, Ellipsoid, make_shape
from potlab.monotone import (
    build_profiles,
    compute_Phi,
    compute_Phi_prime,
    compute_Up,
    compute_Up_prime,
    derivative_scale,
)
from potlab.oracle import ellipsoid_capacity
from potlab.solver import capacity, solve_density


def _line(num, ok, text):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num:2d}: {status} - {text}")
    assert ok, f"criterion {num}: {text}"


def test_criterion_01_ball_capacity_runtime():
    start = time.perf_counter()
    mesh = make_shape(Ball(1.0), 4)
    cap = capacity(solve_density(mesh)).value
    elapsed = time.perf_counter() - start
    rel = abs(cap - 1.0)
    _line(1, rel < 0.005 and elapsed < 60.0 and mesh.n_faces == 5120,
          f"Cap(ball)={cap:.6f} (err {rel:.2e}) at 5120 faces in {elapsed:.1f}s")


def test_criterion_02_ellipsoid_capacity(ell4_field):
    oracle = ellipsoid_capacity(2.0, 1.0, 1.0)
    rel = abs(ell4_field.capacity.value / oracle.value - 1.0)
    prolate = 2.0 * math.sqrt(3.0) / math.log((2 + math.sqrt(3)) / (2 - math.sqrt(3)))
    cross = abs(oracle.value / prolate - 1.0)
    _line(2, rel < 0.01 and cross < 1e-8,
          f"Cap={ell4_field.capacity.value:.6f} vs oracle {oracle.value:.6f} "
          f"(rel {rel:.2e}; oracle cross-check {cross:.1e})")


def test_criterion_03_flux_moment_constancy(ball3_field, ball3_levels,
                                            ell3_field, ell3_levels):
    ok = True
    summary = []
    for name, field, levels in (("ball", ball3_field, ball3_levels),
                                ("ellipsoid", ell3_field, ell3_levels)):
        values = np.array([compute_Up(field, lv, 1.0) for lv in levels])
        spread = (values.max() - values.min()) / values.mean()
        ok = ok and spread < 0.01
        summary.append(f"{name} spread {spread:.2e}")
    _line(3, ok, "U_1 constancy: " + ", ".join(summary))


def test_criterion_04_ball_profile(ball3_field, ball3_levels):
    ok = True
    worst_u, worst_prime = 0.0, 0.0
    for p in (1.5, 2.0, 3.0):
        want = 4.0 * math.pi  # R = 1
        for level in ball3_levels:
            u_val = compute_Up(ball3_field, level, p)
            worst_u = max(worst_u, abs(u_val / want - 1.0))
            prime = compute_Up_prime(ball3_field, level, p)
            scale = derivative_scale(ball3_field, level, p)
            worst_prime = max(worst_prime, abs(prime) / scale)
    ok = worst_u < 0.02 and worst_prime < 0.02
    _line(4, ok, f"ball U_p err {worst_u:.2e} (tol 2e-2), "
                 f"|U_p'|/scale {worst_prime:.2e} (tol 2e-2)")


def test_criterion_05_ellipsoid_monotonicity(ell3_field, ell3_levels):
    delta = 0.01
    worst = np.inf
    limit_gap = np.inf
    for p in (1.5, 2.0, 3.0, 5.0):
        limit = ell3_field.capacity.value**p * 4.0 * math.pi
        for level in ell3_levels:
            prime = compute_Up_prime(ell3_field, level, p)
            scale = derivative_scale(ell3_field, level, p)
            worst = min(worst, prime / scale)
            u_val = compute_Up(ell3_field, level, p)
            limit_gap = min(limit_gap, u_val / limit - 1.0)
    ok = worst >= -delta and limit_gap >= -0.02
    _line(5, ok, f"min U_p'/scale {worst:+.2e} (floor -1e-2); "
                 f"min U_p/limit-1 {limit_gap:+.2e} (floor -2e-2)")


def test_criterion_06_derivative_consistency(ball3_field, ball3_levels,
                                             ell3_field, ell3_levels):
    ok = True
    worst = 0.0
    for field, levels in ((ball3_field, ball3_levels), (ell3_field, ell3_levels)):
        profiles = build_profiles(field, [1.5, 2.0, 3.0], ACCEPT_T_GRID,
                                  levels=levels)
        for p, profile in profiles.items():
            for k in range(1, len(ACCEPT_T_GRID) - 1):
                scale = max(abs(profile.U_prime[k]),
                            derivative_scale(field, levels[k], p))
                gap = abs(profile.U_prime[k] - profile.U_prime_fd[k]) / scale
                worst = max(worst, gap)
    ok = worst < 0.05
    _line(6, ok, f"derivative formula vs finite differences: worst gap "
                 f"{worst:.2e} of scale (tol 5e-2)")


def test_criterion_07_bridge_identities(ell3_field, ell3_levels):
    cap = ell3_field.capacity.value
    worst_u, worst_prime = 0.0, 0.0
    for p in (1.5, 2.0, 3.0):
        for level in ell3_levels:
            lhs = compute_Up(ell3_field, level, p)
            rhs = cap ** (2 * (p - 1)) * compute_Phi(ell3_field, level, p)
            worst_u = max(worst_u, abs(lhs / rhs - 1.0))
            lhs_d = -level.t * compute_Up_prime(ell3_field, level, p)
            rhs_d = cap ** (2 * (p - 1)) * compute_Phi_prime(ell3_field, level, p)
            scale = max(abs(lhs_d), derivative_scale(ell3_field, level, p))
            worst_prime = max(worst_prime, abs(lhs_d - rhs_d) / scale)
    ok = worst_u < 1e-9 and worst_prime < 1e-9
    _line(7, ok, f"bridge identities: moment {worst_u:.2e}, "
                 f"derivative {worst_prime:.2e} (tol 1e-9)")


def test_criterion_08_willmore(ball4_field, ell3_field):
    ball_report = check_willmore(ball4_field.mesh)
    ell_report = check_willmore(ell3_field.mesh)
    mesh = ell3_field.mesh
    scaled = check_willmore(mesh.scaled(1.7))
    scale_dev = abs(scaled.rhs / ell_report.rhs - 1.0)
    ok = (abs(ball_report.rhs / (4 * math.pi) - 1.0) < 0.01
          and ball_report.equality
          and ell_report.rhs > 4 * math.pi and not ell_report.equality
          and scale_dev < 1e-9)
    _line(8, ok, f"willmore: ball {ball_report.rhs:.5f} (eq={ball_report.equality}), "
                 f"ellipsoid {ell_report.rhs:.5f} > 4pi, scale dev {scale_dev:.1e}")


def test_criterion_09_capacity_bracket(ball4_field, ell3_field):
    ell_reports = {r.name: r for r in
                   check_cap_bounds(ell3_field, ell3_field.mesh, 1.5, 5.0)}
    ratio = capacity_ratio(ell3_field)
    lower = ell_reports["cap-bracket-lower"].lhs
    upper = ell_reports["cap-bracket-upper"].rhs
    ball_reports = {r.name: r for r in
                    check_cap_bounds(ball4_field, ball4_field.mesh, 1.5, 5.0)}
    ball_low = ball_reports["cap-bracket-lower"]
    ball_up = ball_reports["cap-bracket-upper"]
    ball_eq = (abs(ball_low.lhs / ball_low.rhs - 1.0) < 0.01
               and abs(ball_up.lhs / ball_up.rhs - 1.0) < 0.01)
    ok = lower < ratio < upper and ball_eq
    _line(9, ok, f"bracket [{lower:.4f}, {upper:.4f}] contains "
                 f"ellipsoid ratio {ratio:.4f}; ball equality within 1%")


def test_criterion_10_overdetermined_residual(ball4_field, ball4_boundary,
                                              ell3_field, ell3_boundary):
    ball_res = overdetermined_residual(ball4_field, ball4_boundary)
    ell_res = overdetermined_residual(ell3_field, ell3_boundary)
    ok = ball_res.sup < 1e-2 and ell_res.l2 > 0.05
    _line(10, ok, f"residual: ball sup {ball_res.sup:.2e} (< 1e-2), "
                  f"ellipsoid l2 {ell_res.l2:.3f} (> 5e-2)")


def test_criterion_11_field_correctness(ball3_field, rng):
    mesh = ball3_field.mesh
    pts = exterior_shell_points(mesh, 20, rng)
    samples = ball3_field.sample_many(pts)
    traces = np.abs(np.trace(samples.hess, axis1=1, axis2=2))
    harmonic = np.all(traces <= 1e-8 * np.linalg.norm(samples.hess, axis=(1, 2)))

    step = 1e-5 * mesh.diameter
    _, grad, hess = ball3_field.evaluate(pts, order=2)
    fd_ok = True
    for axis in range(3):
        offset = np.zeros(3)
        offset[axis] = step
        u_p, g_p, _ = ball3_field.evaluate(pts + offset, order=2)
        u_m, g_m, _ = ball3_field.evaluate(pts - offset, order=2)
        fd_ok &= np.abs((u_p - u_m) / (2 * step) - grad[:, axis]).max() <= \
            1e-5 * np.linalg.norm(grad, axis=1).max()
        fd_ok &= np.abs((g_p - g_m) / (2 * step) - hess[:, axis, :]).max() <= \
            1e-5 * np.linalg.norm(hess, axis=(1, 2)).max()

    far = asymptotic_fit(ball3_field)
    far_ok = abs(far / ball3_field.capacity.value - 1.0) < 0.01
    _line(11, bool(harmonic and fd_ok and far_ok),
          f"harmonicity {harmonic}, derivatives-vs-FD {bool(fd_ok)}, "
          f"far-field fit {far:.6f}")


def test_criterion_12_determinism(tmp_path):
    args = ["profile", "--shape", "ball:1", "--refine", "2",
            "--resolution", "32", "--p", "2",
            "--t-grid", "0.2,0.35,0.5,0.65,0.8"]
    assert main([*args, "--out", str(tmp_path / "a")]) in (0, 2)
    assert main([*args, "--out", str(tmp_path / "b")]) in (0, 2)
    csv_a = (tmp_path / "a" / "profile_p2.csv").read_bytes()
    csv_b = (tmp_path / "b" / "profile_p2.csv").read_bytes()
    check_args = ["check", "--shape", "ball:1", "--refine", "2",
                  "--suite", "willmore,overdetermined"]
    assert main([*check_args, "--out", str(tmp_path / "c")]) in (0, 2)
    assert main([*check_args, "--out", str(tmp_path / "d")]) in (0, 2)
    json_a = (tmp_path / "c" / "reports.jsonl").read_bytes()
    json_b = (tmp_path / "d" / "reports.jsonl").read_bytes()
    ok = csv_a == csv_b and json_a == json_b
    _line(12, ok, f"byte-identical outputs: csv {csv_a == csv_b}, "
                  f"jsonl {json_a == json_b}")
