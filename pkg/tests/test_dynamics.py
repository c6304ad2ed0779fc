import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoguide import dynamics as dy
from twoguide.eigensolver import Grid1D
from twoguide.errors import EmptyPhaseError


def test_initial_state_is_localised(modes):
    chi = dy.evolve(modes, 0.0)
    assert np.array_equal(chi, dy.initial_state(modes))
    pops = dy.well_populations(dy.density(chi), modes.grid)
    assert pops.p_plus > 0.99 and pops.p_minus < 0.01
    assert pops.p_plus + pops.p_minus == pytest.approx(1.0, abs=1e-12)


def test_general_amplitudes_reduce_to_default(modes):
    t = modes.period / 7
    a = 1 / math.sqrt(2)
    chi = dy.evolve(modes, t, (a, a))
    assert np.allclose(chi, dy.evolve(modes, t), atol=1e-14)


def test_norm_conserved(modes):
    for t in np.linspace(0, modes.period, 17):
        assert abs(modes.grid.trapz(dy.density(dy.evolve(modes, t))) - 1) < 1e-8


def test_phase_at_quarter_period_midpoint(modes):
    # chi_o(0) = 0, so tan S(0) = tan(w_s t / 2) = 1 at t = T/4
    snap = dy.snapshot(modes, modes.period / 4)
    assert math.tan(snap.S[modes.grid.center_index]) == pytest.approx(1.0, abs=1e-12)


def test_phase_zero_at_t0(modes):
    snap = dy.snapshot(modes, 0.0)
    assert np.nanmax(np.abs(snap.S)) == 0.0
    assert np.nanmax(np.abs(snap.dS_dy)) == 0.0


def test_snapshot_arrays_read_only(modes):
    snap = dy.snapshot(modes, 1.0)
    with pytest.raises(ValueError):
        snap.rho[0] = 1.0


def test_phase_matches_closed_form(modes):
    t = modes.period / 8
    snap = dy.snapshot(modes, t)
    th = modes.omega_s * t / 2
    ref = np.arctan2(math.sin(th) * modes.phi_minus, math.cos(th) * modes.phi_plus)
    m = snap.mask
    # the arctan anchor fixes S modulo pi only
    diff = np.angle(np.exp(2j * (snap.S[m] - ref[m]))) / 2
    assert np.max(np.abs(diff)) < 1e-10


def test_identity_on_default_grid(modes):
    # multiples of T/2 excluded: there the exact gradient vanishes identically
    for t in np.linspace(0.01, 0.99, 8) * modes.period:
        assert dy.identity_deviation(dy.snapshot(modes, t), modes.mass) < 1e-6


def test_identity_converges_with_grid(default_pot):
    from twoguide.eigensolver import solve_modes

    devs = []
    for n in (4001, 8001):
        m = solve_modes(Grid1D.symmetric(n, 40.0), default_pot)
        devs.append(dy.identity_deviation(dy.snapshot(m, m.period / 8), m.mass))
    assert 3.5 < devs[0] / devs[1] < 4.5


def test_unwrap_route_matches_analytic_gradient(modes):
    t = modes.period / 5
    snap = dy.snapshot(modes, t)
    an = dy.phase_gradient_analytic(modes, t)
    m = snap.mask & np.isfinite(an)
    assert np.max(np.abs(snap.dS_dy[m] - an[m])) / np.max(np.abs(an[m])) < 1e-5


def test_nonzero_gradient_witness(modes):
    T = modes.period
    peak = max(np.nanmax(np.abs(dy.snapshot(modes, t).dS_dy)) for t in np.linspace(0.01, 0.99, 25) * T)
    g = np.nanmax(np.abs(dy.snapshot(modes, T / 8).dS_dy))
    assert g > 1e-3 * peak
    # the binary model's state is a bare 2-vector: there is nothing to differentiate in y
    assert dy.two_level_state(modes.J0, T / 8).shape == (2,)


def test_periodicity(modes):
    T = modes.period
    for t in (T / 9, T / 3):
        a, b = dy.snapshot(modes, t), dy.snapshot(modes, t + T)
        assert np.max(np.abs(a.rho - b.rho)) < 1e-10
        m = a.mask & b.mask
        d = np.angle(np.exp(1j * (a.S[m] - b.S[m])))
        assert np.max(np.abs(d)) < 1e-8


@settings(max_examples=10, deadline=None)
@given(frac=st.floats(0.0, 0.5))
def test_half_period_mirror_and_time_reversal(modes, frac):
    T = modes.period
    tau = frac * T

    def rho(t):
        return dy.density(dy.evolve(modes, t))

    assert np.max(np.abs(rho(T / 2 + tau) - rho(tau)[::-1])) < 1e-10
    assert np.max(np.abs(rho(T / 2 + tau) - rho(T / 2 - tau))) < 1e-10


def test_two_level_oracle_values():
    assert dy.two_level_oracle(0.3, 0.0) == (1.0, 0.0)
    up, down = dy.two_level_oracle(0.5, math.pi)
    assert up == pytest.approx(0.0, abs=1e-15) and down == pytest.approx(1.0)


def test_oracle_tracks_full_model(modes):
    ts = np.linspace(0, modes.period, 401)
    _, pm = dy.population_series(modes, ts)
    assert np.max(np.abs(pm - np.sin(modes.J0 * ts) ** 2)) < 0.01


def test_population_series_matches_direct_integration(modes):
    for t in (0.0, 13.0, modes.period / 2):
        direct = dy.well_populations(dy.density(dy.evolve(modes, t)), modes.grid, t)
        pp, pm = dy.population_series(modes, [t])
        assert pp[0] == pytest.approx(direct.p_plus, abs=1e-13)
        assert pm[0] == pytest.approx(direct.p_minus, abs=1e-13)


def test_transfer_law_closed_form(modes):
    ts = np.linspace(0, modes.period, 33)
    _, pm = dy.population_series(modes, ts)
    eps = pm[0]
    assert np.allclose(pm, eps + (1 - 2 * eps) * np.sin(modes.omega_s * ts / 2) ** 2, atol=1e-12)


def test_power_law_fit_recovers_exponent():
    t = np.geomspace(0.1, 1.0, 20)
    slope, pref = dy.power_law_fit(t, 3.0 * t**2)
    assert slope == pytest.approx(2.0) and pref == pytest.approx(3.0)


def test_continuity_second_order(default_pot):
    from twoguide.eigensolver import solve_modes

    res = []
    for n, steps in ((4001, 1000), (8001, 2000)):
        m = solve_modes(Grid1D.symmetric(n, 40.0), default_pot)
        res.append(dy.continuity_residual(m, m.period / 7, m.period / steps))
    assert res[1] < 1e-4
    assert 3.5 <= res[0] / res[1] <= 4.5


def test_continuity_general_superposition(coarse_modes):
    r = dy.continuity_residual(coarse_modes, 11.0, coarse_modes.period / 1000, amplitudes=(0.8, 0.6))
    assert r < 1e-3


def test_empty_mask_raises():
    with pytest.raises(EmptyPhaseError):
        dy.phase(np.ones(5, complex), mask=np.zeros(5, bool))


def test_short_fragment_warns():
    S = np.array([0.0, 1.0, np.nan, 0.0, 1.0, 2.0, 3.0])
    with pytest.warns(RuntimeWarning, match="shorter than 3"):
        g = dy.phase_gradient(S, 1.0)
    assert np.isnan(g[:3]).all()
    assert np.allclose(g[3:], 1.0)


def test_phase_unwraps_across_branch():
    y = np.linspace(0, 10, 501)
    chi = np.exp(1j * 2.0 * y)
    S = dy.phase(chi)
    assert np.allclose(dy.phase_gradient(S, y[1] - y[0]), 2.0)


def test_current_of_plane_wave():
    y = np.linspace(0, 10, 2001)
    k, m = 1.3, 0.7
    j = dy.current(np.exp(1j * k * y), y[1] - y[0], m)
    assert np.allclose(j, k / m, rtol=1e-4)
