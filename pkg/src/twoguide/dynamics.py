"""Two-mode transverse dynamics: density, phase, phase gradient, current.

The state is evolved in the frame rotating with the mean energy E_bar, i.e.

    chi(y, t) = cos(w_s t / 2) (chi_e + chi_o)/sqrt(2)
              + i sin(w_s t / 2) (chi_e - chi_o)/sqrt(2)

The phase gradient is available by two independent routes: unwrapping
arg(chi) along y and differencing it, and m j / (hbar rho) from the
probability current.  Their agreement is the identity grad S = m j / rho.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptyPhaseError

EPS_RHO = 1e-12
GAUGE = "rotating frame, global factor exp(-i E_bar t / hbar) removed"


@dataclass(frozen=True)
class FieldSnapshot:
    t: float
    y: np.ndarray
    rho: np.ndarray
    S: np.ndarray
    dS_dy: np.ndarray
    j_y: np.ndarray
    v_y: np.ndarray
    mask: np.ndarray
    eps_rho: float = EPS_RHO

    def __post_init__(self):
        for name in ("rho", "S", "dS_dy", "j_y", "v_y", "mask"):
            getattr(self, name).setflags(write=False)


@dataclass(frozen=True)
class WellPopulations:
    t: float
    p_plus: float
    p_minus: float


def _angle(omega_s, t):
    return 0.5 * omega_s * t


def initial_state(modes):
    return (modes.phi_plus + 0j).copy()


def evolve(modes, t, amplitudes=None):
    """State at time ``t`` in the rotating frame.

    ``amplitudes=(a_e, a_o)`` evolves an arbitrary superposition
    a_e chi_e + a_o chi_o instead of the equal-weight one.
    """
    th = _angle(modes.omega_s, t)
    if amplitudes is None:
        return math.cos(th) * modes.phi_plus + 1j * math.sin(th) * modes.phi_minus
    a_e, a_o = amplitudes
    return a_e * np.exp(1j * th) * modes.chi_e + a_o * np.exp(-1j * th) * modes.chi_o


def density(chi):
    return chi.real**2 + chi.imag**2


def density_mask(rho, eps_rho=EPS_RHO):
    return rho > eps_rho * rho.max()


def _components(mask):
    """(start, stop) index ranges of the connected runs of True in ``mask``."""
    m = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(m))
    return list(zip(edges[::2], edges[1::2]))


def phase(chi, mask=None, eps_rho=EPS_RHO):
    """Unwrapped phase along y; NaN where the density is below the floor.

    Each connected masked run is unwrapped left to right and anchored at its
    first point on the principal branch of arctan(Im chi / Re chi), in
    (-pi/2, pi/2].
    """
    if mask is None:
        mask = density_mask(density(chi), eps_rho)
    if not mask.any():
        raise EmptyPhaseError("density is below the floor everywhere; phase undefined")
    S = np.full(chi.shape, np.nan)
    for a, b in _components(mask):
        seg = chi[a:b]
        z = seg[0]
        anchor = math.atan(z.imag / z.real) if z.real != 0 else math.pi / 2
        steps = np.angle(seg[1:] * np.conj(seg[:-1]))
        S[a:b] = anchor + np.concatenate([[0.0], np.cumsum(steps)])
    return S


def phase_gradient(S, h):
    """Central differences of the unwrapped phase, one-sided at run edges.

    Runs shorter than three points are left undefined (NaN).
    """
    g = np.full(S.shape, np.nan)
    skipped = 0
    for a, b in _components(np.isfinite(S)):
        if b - a < 3:
            skipped += 1
            continue
        s = S[a:b]
        gs = np.empty_like(s)
        gs[1:-1] = (s[2:] - s[:-2]) / (2 * h)
        gs[0] = (-3 * s[0] + 4 * s[1] - s[2]) / (2 * h)
        gs[-1] = (3 * s[-1] - 4 * s[-2] + s[-3]) / (2 * h)
        g[a:b] = gs
    if skipped:
        warnings.warn(f"{skipped} masked fragment(s) shorter than 3 points skipped", RuntimeWarning, stacklevel=2)
    return g


def grid_derivative(f, h):
    return np.gradient(f, h, edge_order=2)


def phase_gradient_analytic(modes, t, eps_rho=EPS_RHO):
    """d/dy of arctan(r(y) tan(w_s t/2)), r = (chi_e - chi_o)/(chi_e + chi_o).

    Written as  c s (P M' - M P') / (c^2 P^2 + s^2 M^2)  with P, M the
    localised combinations, which stays finite through tan's poles.  The
    derivatives P', M' are second-order grid derivatives.
    """
    th = _angle(modes.omega_s, t)
    c, s = math.cos(th), math.sin(th)
    h = modes.grid.spacing
    P, M = modes.phi_plus, modes.phi_minus
    dP, dM = grid_derivative(P, h), grid_derivative(M, h)
    rho = c * c * P * P + s * s * M * M
    mask = density_mask(rho, eps_rho)
    out = np.full(rho.shape, np.nan)
    out[mask] = c * s * (P * dM - M * dP)[mask] / rho[mask]
    return out


def current(chi, h, mass):
    """j = (hbar/m) Im(chi* d chi/dy) with hbar = 1."""
    dchi = grid_derivative(chi, h)
    return (chi.real * dchi.imag - chi.imag * dchi.real) / mass


def snapshot(modes, t, eps_rho=EPS_RHO):
    chi = evolve(modes, t)
    rho = density(chi)
    mask = density_mask(rho, eps_rho)
    S = phase(chi, mask)
    dS = phase_gradient(S, modes.grid.spacing)
    j = current(chi, modes.grid.spacing, modes.mass)
    return FieldSnapshot(
        t=float(t), y=modes.y, rho=rho, S=S, dS_dy=dS, j_y=j,
        v_y=dS / modes.mass, mask=mask, eps_rho=eps_rho,
    )


def identity_deviation(snap, mass):
    """max |dS/dy - m j / rho| / max |dS/dy| over the mask."""
    m = snap.mask & np.isfinite(snap.dS_dy)
    via_current = mass * snap.j_y[m] / snap.rho[m]
    scale = np.max(np.abs(snap.dS_dy[m]))
    if scale == 0.0:
        return float(np.max(np.abs(via_current)))
    return float(np.max(np.abs(snap.dS_dy[m] - via_current)) / scale)


def continuity_residual(modes, t, dt, eps_rho=EPS_RHO, amplitudes=None):
    """max |d rho/dt + d j/dy| over the masked interior, over max(rho) * w_s.

    d rho/dt is a centred difference of the exact two-mode density, d j/dy a
    centred difference of the grid current; the result is second order in
    both dt and h.
    """
    h = modes.grid.spacing
    chi = evolve(modes, t, amplitudes)
    rho = density(chi)
    drho = (density(evolve(modes, t + dt, amplitudes)) - density(evolve(modes, t - dt, amplitudes))) / (2 * dt)
    j = current(chi, h, modes.mass)
    R = drho + grid_derivative(j, h)
    interior = np.zeros_like(rho, dtype=bool)
    for a, b in _components(density_mask(rho, eps_rho)):
        interior[a + 1:b - 1] = True
    if not interior.any():
        return 0.0
    return float(np.max(np.abs(R[interior])) / (rho.max() * modes.omega_s))


def well_populations(rho, grid, t=0.0):
    """Probability on each side of y = 0; the y = 0 node is shared evenly."""
    c = grid.center_index
    p_minus = np.trapezoid(rho[: c + 1], dx=grid.spacing)
    p_plus = np.trapezoid(rho[c:], dx=grid.spacing)
    return WellPopulations(float(t), float(p_plus), float(p_minus))


def population_series(modes, times):
    """Arrays (p_plus, p_minus) at each time."""
    times = np.asarray(times, dtype=float)
    th = 0.5 * modes.omega_s * times
    g = modes.grid
    c = g.center_index
    # rho = cos^2 P^2 + sin^2 M^2 exactly, so the half-line integrals separate
    P2, M2 = modes.phi_plus**2, modes.phi_minus**2
    PL = np.trapezoid(P2[: c + 1], dx=g.spacing)
    ML = np.trapezoid(M2[: c + 1], dx=g.spacing)
    PR = np.trapezoid(P2[c:], dx=g.spacing)
    MR = np.trapezoid(M2[c:], dx=g.spacing)
    cos2, sin2 = np.cos(th) ** 2, np.sin(th) ** 2
    return cos2 * PR + sin2 * MR, cos2 * PL + sin2 * ML


def transferred_population(modes, times):
    """p_minus(t) - p_minus(0): density moved into the negative-y guide."""
    _, pm = population_series(modes, times)
    _, pm0 = population_series(modes, [0.0])
    return pm - pm0[0]


def two_level_oracle(J0, t):
    """(p_up, p_down) of the binary two-guide model with coupling J0."""
    return math.cos(J0 * t) ** 2, math.sin(J0 * t) ** 2


def two_level_state(J0, t):
    """Amplitudes (psi_up, psi_down); they carry no y coordinate at all."""
    return np.array([math.cos(J0 * t), -1j * math.sin(J0 * t)])


def power_law_fit(t, p):
    """Least-squares fit log p = slope log t + log prefactor."""
    slope, icpt = np.polyfit(np.log(t), np.log(p), 1)
    return float(slope), float(math.exp(icpt))
