"""Bohmian velocity field of the two-mode state and trajectory ensembles."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from . import kernels
from .dynamics import EPS_RHO, density, density_mask, evolve, grid_derivative
from .errors import DomainError, EmptyPhaseError, PreconditionError
from .units import velocity_to_m_per_s


class VelocityField:
    """v(y, t) = (hbar/m) dS/dy for  chi = cos(th) P + i sin(th) M,  th = w_s t / 2.

    P, M and their grid derivatives are interpolated with cubic splines in y;
    the time dependence enters exactly through cos(th) and sin(th).  Below the
    density floor the velocity is set to 0 and flagged.
    """

    def __init__(self, grid, phi_plus, phi_minus, omega_s, mass, eps_rho=EPS_RHO):
        self.grid = grid
        self.omega_s = float(omega_s)
        self.mass = float(mass)
        self.eps_rho = eps_rho
        h = grid.spacing
        funcs = np.stack(
            [phi_plus, phi_minus, grid_derivative(phi_plus, h), grid_derivative(phi_minus, h)], axis=1
        )
        spline = CubicSpline(grid.y, funcs)
        # (cell, 4 functions x 4 coefficients), highest power first
        self.table = np.ascontiguousarray(spline.c.transpose(1, 2, 0).reshape(grid.n_points - 1, 16))
        self.knots = np.ascontiguousarray(grid.y)
        self._p2 = phi_plus**2
        self._m2 = phi_minus**2
        self._p2max = float(self._p2.max())
        self._m2max = float(self._m2.max())

    @classmethod
    def from_modes(cls, modes, mass=None, eps_rho=EPS_RHO):
        return cls(modes.grid, modes.phi_plus, modes.phi_minus, modes.omega_s,
                   modes.mass if mass is None else mass, eps_rho)

    @property
    def vscale(self):
        return 1.0 / self.mass

    def stage(self, t):
        """cos, sin and absolute density floor at time ``t``."""
        th = 0.5 * self.omega_s * np.asarray(t, dtype=float)
        c, s = np.cos(th), np.sin(th)
        # cheap upper bound on max rho(., t), within a factor 2 of the true max
        floor = self.eps_rho * (c * c * self._p2max + s * s * self._m2max)
        return c, s, floor

    def density(self, t):
        c, s, _ = self.stage(t)
        return c * c * self._p2 + s * s * self._m2

    def evaluate(self, y, t):
        """(v, flagged) at positions ``y`` and scalar time ``t``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if y.size and (y.min() < self.grid.y_min or y.max() > self.grid.y_max):
            raise DomainError(
                f"velocity requested outside grid [{self.grid.y_min}, {self.grid.y_max}]"
            )
        c, s, floor = self.stage(t)
        return kernels.velocity(self.table, self.knots, self.vscale, y, float(c), float(s), float(floor))

    def __call__(self, y, t):
        return self.evaluate(y, t)[0]


def velocity_field(modes, mass=None, eps_rho=EPS_RHO):
    return VelocityField.from_modes(modes, mass, eps_rho)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    times: np.ndarray
    positions: np.ndarray
    seed: int
    dt: float
    exited: np.ndarray
    floor_hits: int
    backend: str

    @property
    def n_traj(self):
        return self.positions.shape[0]

    @property
    def exit_count(self):
        return int(self.exited.sum())

    def at(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 0.5 * self.dt + 1e-12 * max(1.0, abs(t)):
            raise PreconditionError(f"t={t} is not a stored time of this ensemble")
        return self.positions[:, i]


def sample_initial(rho, grid, n, seed):
    """Inverse-CDF samples from the grid density ``rho``."""
    cdf = cumulative_trapezoid(rho, grid.y, initial=0.0)
    cdf /= cdf[-1]
    u = np.random.default_rng(seed).random(n)
    return np.interp(u, cdf, grid.y)


def integrate_trajectories(field, n_traj, t_final, dt, seed, store_every=1,
                           t0=0.0, y0=None, initial_rho=None, backend=None):
    """Fixed-step RK4 integration of dy/dt = v(y, t).

    Initial positions are drawn from ``initial_rho`` (default: the field's
    density at ``t0``) with one generator seeded by ``seed``, trajectory i
    taking the i-th draw, so the ensemble does not depend on scheduling.
    Trajectories leaving the grid are clamped to its edge and flagged.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    n_steps = int(round((t_final - t0) / dt))
    if n_steps < 1 or not math.isclose(n_steps * dt, t_final - t0, rel_tol=1e-9):
        raise ValueError("t_final - t0 must be a positive multiple of dt")
    if n_steps % store_every:
        raise ValueError("store_every must divide the number of steps")
    if field.omega_s > 0 and dt > 2 * math.pi / field.omega_s / 1000:
        raise PreconditionError("dt must not exceed T/1000")
    g = field.grid
    if y0 is None:
        if initial_rho is None:
            initial_rho = field.density(t0)
        y0 = sample_initial(initial_rho, g, n_traj, seed)
    y0 = np.asarray(y0, dtype=float)

    tn = t0 + dt * np.arange(n_steps)
    stages = np.stack([tn, tn + 0.5 * dt, tn + dt], axis=1)
    c, s, floor = field.stage(stages)
    impl = kernels.get(backend)
    pos, exited, hits = impl.rk4_integrate(
        field.table, field.knots, field.vscale, y0,
        np.ascontiguousarray(c), np.ascontiguousarray(s), np.ascontiguousarray(floor),
        float(dt), n_steps, int(store_every), float(g.y_min), float(g.y_max),
    )
    times = t0 + dt * store_every * np.arange(pos.shape[1])
    name = "python" if impl is kernels._pykernels else "cython"
    return TrajectoryEnsemble(times, pos, seed, float(dt), np.asarray(exited, bool), int(hits), name)


def non_crossing(ensemble):
    """True if every stored snapshot keeps the initial ordering of trajectories."""
    order = np.argsort(ensemble.positions[:, 0], kind="stable")
    ordered = ensemble.positions[order]
    return bool(np.all(np.diff(ordered, axis=0) >= 0.0))


def histogram_edges(grid, bin_width):
    n = max(1, int(round((grid.y_max - grid.y_min) / bin_width)))
    return np.linspace(grid.y_min, grid.y_max, n + 1)


def equivariance_distance(ensemble, modes, t, bin_width=1.0):
    """L1 distance between the trajectory histogram at ``t`` and the exact rho(y, t).

    Both are reduced to probability masses on bins of ``bin_width`` (um); the
    exact masses come from the cumulative trapezoid integral of rho.
    """
    ys = ensemble.at(t)
    g = modes.grid
    edges = histogram_edges(g, bin_width)
    counts, _ = np.histogram(ys, bins=edges)
    rho = density(evolve(modes, t))
    cdf = cumulative_trapezoid(rho, g.y, initial=0.0)
    mass = np.diff(np.interp(edges, g.y, cdf / cdf[-1]))
    return float(np.sum(np.abs(counts / ys.size - mass)))


def sampling_noise_estimate(modes, n, bin_width=1.0):
    """Expected L1 from multinomial noise alone, sqrt(2/pi) sum sqrt(p(1-p)/n)."""
    g = modes.grid
    rho = density(evolve(modes, 0.0))
    cdf = cumulative_trapezoid(rho, g.y, initial=0.0)
    p = np.diff(np.interp(histogram_edges(g, bin_width), g.y, cdf / cdf[-1]))
    return float(math.sqrt(2 / math.pi) * np.sum(np.sqrt(p * (1 - p) / n)))


@dataclass(frozen=True)
class SpeedStatistics:
    """|v| averages in m/s over a (y, t) window."""

    mean_abs_v_uniform: float
    mean_abs_v_rho_weighted: float
    peak_abs_v: float
    n_cells: int

    def as_tuple(self):
        return (self.mean_abs_v_uniform, self.mean_abs_v_rho_weighted, self.peak_abs_v)


def speed_statistics(modes, window=(-5.0, 5.0), t_range=None, n_t=201, mass=None, eps_rho=EPS_RHO):
    """Uniform, density-weighted and peak |v| over ``window`` x ``t_range``.

    Velocities are the closed-form two-mode values on grid points; points
    below the density floor are excluded.
    """
    m = modes.mass if mass is None else mass
    g = modes.grid
    lo, hi = window
    if lo < g.y_min or hi > g.y_max:
        raise DomainError("speed window outside the grid")
    sel = (g.y >= lo) & (g.y <= hi)
    if t_range is None:
        t_range = (0.0, modes.period)
    h = g.spacing
    P, M = modes.phi_plus, modes.phi_minus
    W = (P * grid_derivative(M, h) - M * grid_derivative(P, h))[sel]
    P2, M2 = (P * P), (M * M)
    total = weighted = weight = 0.0
    peak = 0.0
    count = 0
    for t in np.linspace(t_range[0], t_range[1], n_t):
        th = 0.5 * modes.omega_s * t
        c, s = math.cos(th), math.sin(th)
        rho_all = c * c * P2 + s * s * M2
        keep = density_mask(rho_all, eps_rho)[sel]
        rho = rho_all[sel][keep]
        v = np.abs(c * s * W[keep] / rho) / m
        count += v.size
        if v.size:
            total += v.sum()
            weighted += (rho * v).sum()
            weight += rho.sum()
            peak = max(peak, float(v.max()))
    if count == 0:
        raise EmptyPhaseError("no cell above the density floor inside the speed window")
    return SpeedStatistics(
        float(velocity_to_m_per_s(total / count)),
        float(velocity_to_m_per_s(weighted / weight)) if weight > 0 else 0.0,
        float(velocity_to_m_per_s(peak)),
        count,
    )
