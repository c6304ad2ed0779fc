"""Acceptance suite: one test per criterion, each recording a pass/fail line."""
import math
import time

import numpy as np
import pytest

from twoguide import bohmian, units
from twoguide import dynamics as dy
from twoguide import xaxis as xa
from twoguide.cli import fit_small_time, map_support, phasemap_data
from twoguide.config import RunConfig
from twoguide.eigensolver import Grid1D, PotentialSpec, build_hamiltonian, calibrate, solve_lowest, solve_modes

from conftest import DEFAULT_MASS, DEFAULT_W0

TARGET_SPEED = 1.4e6  # m/s


def record(log, n, ok, text):
    log.append((n, bool(ok), text))
    assert ok, f"criterion {n}: {text}"


def test_c01_harmonic_spectrum(acceptance_log):
    ell = 1.0 / math.sqrt(DEFAULT_MASS * DEFAULT_W0)
    t0 = time.perf_counter()
    g = Grid1D.symmetric(4001, 12.0 * ell)
    pairs = solve_lowest(build_hamiltonian(g, PotentialSpec(DEFAULT_MASS, 0.0, DEFAULT_W0)), 4)
    elapsed = time.perf_counter() - t0
    E = np.array([p[0] for p in pairs])
    err = float(np.max(np.abs(E / (DEFAULT_W0 * (np.arange(4) + 0.5)) - 1)))
    record(acceptance_log, 1, err < 1e-4 and elapsed < 5.0,
           f"harmonic levels max rel err {err:.2e} (< 1e-4), {elapsed:.2f} s (< 5 s)")


def test_c02_calibration(acceptance_log):
    cfg = RunConfig()
    g = cfg.build_grid()
    start = cfg.build_potential().with_(well_frequency=units.rad_per_s_to_internal(5e12))
    t0 = time.perf_counter()
    pot = calibrate(80.0, "well_frequency", start, g, cfg.calibration_bracket(), rtol=1e-3)
    period = solve_modes(g, pot).period
    elapsed = time.perf_counter() - t0
    rel = abs(period / 80.0 - 1)
    record(acceptance_log, 2, rel < 1e-3 and elapsed < 30.0,
           f"calibrated period {period:.6f} ps, rel err {rel:.1e} (< 1e-3), {elapsed:.1f} s (< 30 s)")


def test_c03_phase_gradient_identity(modes, acceptance_log):
    # offset from multiples of T/2, where the exact gradient vanishes identically
    T = modes.period
    times = np.linspace(0.0, T, 50, endpoint=False) + T / 100
    dev = max(dy.identity_deviation(dy.snapshot(modes, t), modes.mass) for t in times)
    record(acceptance_log, 3, dev < 1e-6, f"identity deviation {dev:.2e} over 50 times (< 1e-6)")


def test_c04_nonzero_gradient_witness(modes, acceptance_log):
    snap = dy.snapshot(modes, modes.period / 8)
    g = float(np.nanmax(np.abs(snap.dS_dy)))
    amp = dy.two_level_state(modes.J0, modes.period / 8)
    record(acceptance_log, 4, g > 0 and amp.shape == (2,),
           f"max|dS/dy|(T/8) = {g:.3e} /um > 0; two-level state has {amp.size} y-free amplitudes")


def test_c05_phase_map(modes, acceptance_log):
    cfg = RunConfig()
    y, ts, mat = phasemap_data(modes, cfg["numerics.t_samples"], cfg["numerics.phasemap_y_stride"],
                               cfg["numerics.eps_rho"])
    support = map_support(y, mat)
    mid = float(dy.snapshot(modes, ts[1]).dS_dy[modes.grid.center_index])
    st = bohmian.speed_statistics(modes)
    speeds = st.as_tuple()
    close = [v for v in speeds if TARGET_SPEED / 3 <= v <= 3 * TARGET_SPEED]
    ok = support <= 5.0 and mid < 0 and bool(close)
    record(acceptance_log, 5, ok,
           f"support |y| <= {support:.1f} um (need <= 5), mid-channel dS/dy {mid:.3g} (< 0), "
           f"speeds {', '.join(f'{v:.2e}' for v in speeds)} m/s ({len(close)} within x3 of 1.4e6)")


def test_c06_quadratic_transfer(modes, acceptance_log):
    slope, curv = fit_small_time(modes)
    ok = abs(slope - 2) <= 0.02 and abs(curv - 1) <= 0.02
    record(acceptance_log, 6, ok,
           f"log-log slope {slope:.4f} (2 +- 0.02), prefactor / (w_s^2/4) = {curv:.4f} (within 2%)")


def test_c07_parabolic_profile(modes, acceptance_log):
    c = RunConfig().build_longitudinal(modes.mass)
    vx = xa.group_velocity(c).real
    xs = np.linspace(0.02, 0.2, 101) * vx / modes.omega_s
    prof = xa.rho_a_profile(xs, c, modes)
    ratio = prof[:, 1] / xs**2 / xa.quadratic_coefficient(c, modes)
    dev = float(np.max(np.abs(ratio - 1)))
    record(acceptance_log, 7, dev < 0.01, f"rho_a / x^2 over w_s^2/(4 v_x^2) within {dev:.2e} of 1 (< 1e-2)")


def test_c08_evanescent_identity(modes, acceptance_log):
    c = xa.special_config(modes, RunConfig().build_longitudinal(modes.mass).step_height)
    xs = np.linspace(0.0, 1300.0, 201)
    p = xa.damped_profiles(xs, c, modes)
    env = np.exp(-2 * abs(xa.k2(c)) * xs)
    err = float(np.max(np.abs(p[:, 1] + p[:, 2] - env)))
    record(acceptance_log, 8, err <= 4 * np.finfo(float).eps,
           f"|psi_m|^2 + |psi_a|^2 - exp(-2|k2|x) max {err:.1e} (<= 4 eps)")


def test_c09_continuity(default_pot, modes, acceptance_log):
    res = []
    for n, steps in ((4001, 1000), (8001, 2000)):
        m = solve_modes(Grid1D.symmetric(n, 40.0), default_pot)
        res.append(dy.continuity_residual(m, m.period / 7, m.period / steps))
    fine = dy.continuity_residual(modes, modes.period / 7, modes.period / 1000)
    ratio = res[0] / res[1]
    ok = fine < 1e-4 and 3.5 <= ratio <= 4.5
    record(acceptance_log, 9, ok,
           f"residual {fine:.2e} on default grid (< 1e-4), halving ratio {ratio:.3f} (in [3.5, 4.5])")


def test_c10_equivariance(modes, acceptance_log):
    T = modes.period
    t0 = time.perf_counter()
    field = bohmian.velocity_field(modes)
    ens = bohmian.integrate_trajectories(field, 10_000, T, T / 2000, seed=RunConfig()["numerics.seed"],
                                         store_every=50)
    elapsed = time.perf_counter() - t0
    l1 = [bohmian.equivariance_distance(ens, modes, f * T) for f in (0.0, 0.25, 0.5, 1.0)]
    nc = bohmian.non_crossing(ens)
    ok = max(l1) < 0.05 and nc and elapsed < 60.0
    record(acceptance_log, 10, ok,
           f"L1 at 0, T/4, T/2, T = {', '.join(f'{d:.3f}' for d in l1)} (< 0.05), "
           f"non-crossing {nc}, {elapsed:.1f} s (< 60 s)")
