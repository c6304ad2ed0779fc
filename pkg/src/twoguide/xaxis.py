"""Longitudinal (x) kinematics for x > 0 beyond the potential step.

The transverse dynamics never depends on anything here; the x axis only
supplies the time-of-flight map t = x / v_x and the plane-wave density
|phi_k2(x)|**2.  Profiles are reported relative to their x = 0 value (the box
normalisation 1/L is dropped).
"""
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import population_series, transferred_population
from .errors import InputError, PreconditionError, RegimeError

SPECIAL_DETUNING_RTOL = 1e-9


@dataclass(frozen=True)
class LongitudinalConfig:
    """Beam energy E, step height V0 and mass m (internal units).

    Detuning and incident wavenumber are derived, so the three encodings of
    the energy cannot disagree.
    """

    mass: float
    step_height: float
    beam_energy: float

    def __post_init__(self):
        for name in ("mass", "step_height", "beam_energy"):
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"longitudinal {name} is not finite")
        if self.mass <= 0:
            raise InputError("mass must be positive")

    @classmethod
    def from_detuning(cls, mass, step_height, detuning):
        return cls(mass, step_height, step_height + detuning)

    @classmethod
    def from_k0(cls, mass, step_height, k0):
        return cls(mass, step_height, k0 * k0 / (2.0 * mass))

    @property
    def detuning(self):
        return self.beam_energy - self.step_height

    @property
    def k0(self):
        if self.beam_energy < 0:
            raise PreconditionError("negative beam energy has no real incident wavenumber")
        return math.sqrt(2.0 * self.mass * self.beam_energy)

    @property
    def propagating(self):
        return self.detuning > 0


def k2(cfg):
    """Wavenumber beyond the step: real above V0, positive-imaginary below."""
    q = 2.0 * cfg.mass * cfg.detuning
    if q >= 0:
        return complex(math.sqrt(q), 0.0)
    return complex(0.0, math.sqrt(-q))


def group_velocity(cfg):
    """v_x = hbar k2 / m (complex in the evanescent regime)."""
    return k2(cfg) / cfg.mass


def plane_wave_density(x, cfg):
    """|phi_k2(x)|**2 relative to x = 0, i.e. exp(-2 Im(k2) x)."""
    return np.exp(-2.0 * k2(cfg).imag * np.asarray(x, dtype=float))


def x_to_t(x, cfg):
    """Time of flight t = x m / (hbar Re k2); propagating regime only."""
    if not cfg.propagating:
        raise RegimeError(
            f"x -> t mapping needs E > V0 (real k2); detuning is {cfg.detuning:.6g}"
        )
    return np.asarray(x, dtype=float) * cfg.mass / k2(cfg).real


def rho_a_profile(xs, cfg, modes, subtract_baseline=True):
    """Population of the negative-y guide against x, columns (x, rho_a).

    With ``subtract_baseline`` the static overlap p_minus(0) is removed, so
    rho_a is the density transferred since x = 0.
    """
    xs = np.asarray(xs, dtype=float)
    t = x_to_t(xs, cfg)
    if subtract_baseline:
        rho_a = transferred_population(modes, t)
    else:
        rho_a = population_series(modes, t)[1]
    return np.column_stack([xs, rho_a])


def quadratic_coefficient(cfg, modes):
    """w_s**2 / (4 v_x**2): small-x curvature of rho_a."""
    vx = group_velocity(cfg).real
    return modes.omega_s**2 / (4.0 * vx * vx)


def special_detuning(modes):
    """The detuning -hbar J0 at which the evanescent profiles are derived."""
    return -modes.J0


def special_config(modes, step_height, mass=None):
    return LongitudinalConfig.from_detuning(
        modes.mass if mass is None else mass, step_height, special_detuning(modes)
    )


def evanescent_rates(cfg, modes):
    """Oscillation rates of the two guide populations along x at Delta = -hbar J0.

    Returns ``(kinematic, quarter)``: J0 / |v_x| from the time-of-flight map,
    and |k2| / 4.  Algebraically the first equals |k2| / 2.
    """
    kabs = abs(k2(cfg))
    vabs = kabs / cfg.mass
    return modes.J0 / vabs, kabs / 4.0


def check_special_detuning(cfg, modes, rtol=SPECIAL_DETUNING_RTOL):
    if cfg.propagating or cfg.detuning == 0:
        raise RegimeError(
            f"evanescent profiles need E < V0; detuning is {cfg.detuning:.6g}"
        )
    target = special_detuning(modes)
    if abs(cfg.detuning - target) > rtol * abs(target):
        raise PreconditionError(
            f"damped profiles are only defined at detuning -hbar*J0 = {target:.12g}; "
            f"got {cfg.detuning:.12g}"
        )


def damped_profiles(xs, cfg, modes, phase_rate="kinematic"):
    """Columns (x, |psi_m|^2, |psi_a|^2) in the evanescent regime.

    |psi_m|^2 = exp(-2|k2|x) cos^2(q x),  |psi_a|^2 = exp(-2|k2|x) sin^2(q x)

    with q = J0/|v_x| (``phase_rate="kinematic"``, equal to |k2|/2 here) or
    q = |k2|/4 (``phase_rate="quarter"``).
    """
    check_special_detuning(cfg, modes)
    kinematic, quarter = evanescent_rates(cfg, modes)
    try:
        q = {"kinematic": kinematic, "quarter": quarter}[phase_rate]
    except KeyError:
        raise ValueError(f"phase_rate must be 'kinematic' or 'quarter', got {phase_rate!r}") from None
    xs = np.asarray(xs, dtype=float)
    damp = np.exp(-2.0 * abs(k2(cfg)) * xs)
    return np.column_stack([xs, damp * np.cos(q * xs) ** 2, damp * np.sin(q * xs) ** 2])


def k2_components(cfg):
    k = k2(cfg)
    return k.real, k.imag


__all__ = [
    "LongitudinalConfig", "k2", "group_velocity", "plane_wave_density", "x_to_t",
    "rho_a_profile", "quadratic_coefficient", "special_detuning", "special_config",
    "evanescent_rates", "check_special_detuning", "damped_profiles",
]
