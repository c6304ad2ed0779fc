"""Transverse double-well eigenproblem.

The transverse Hamiltonian  H = p**2 / 2m + V(y)  is discretised with
second-order central differences on a uniform grid with Dirichlet ends and
the lowest even/odd pair is extracted.  Units are internal (hbar = 1, um, ps).
"""
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import (
    CalibrationError,
    ConfigError,
    DegenerateSplittingError,
    InputError,
    ModelViolationError,
    NumericError,
)

log = logging.getLogger(__name__)

PARITY_RTOL = 1e-6
DEGENERACY_FACTOR = 1e3


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [y_min, y_max] (um)."""

    n_points: int
    y_min: float
    y_max: float

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ConfigError(f"grid needs n_points >= 3, got {self.n_points}")
        if not (math.isfinite(self.y_min) and math.isfinite(self.y_max)):
            raise InputError("grid extent must be finite")
        if not self.y_max > self.y_min:
            raise ConfigError(f"grid needs y_max > y_min, got [{self.y_min}, {self.y_max}]")

    @classmethod
    def symmetric(cls, n_points, y_max):
        return cls(int(n_points), -float(y_max), float(y_max))

    @property
    def spacing(self):
        return (self.y_max - self.y_min) / (self.n_points - 1)

    h = spacing

    @cached_property
    def y(self):
        if self.is_symmetric and self.n_points % 2 == 1:
            # exact antisymmetry y[i] == -y[-1-i]; mirror tests rely on it
            y = (np.arange(self.n_points) - self.center_index) * self.spacing
        else:
            y = np.linspace(self.y_min, self.y_max, self.n_points)
        y.setflags(write=False)
        return y

    @property
    def is_symmetric(self):
        return math.isclose(self.y_min, -self.y_max, rel_tol=1e-12, abs_tol=0.0)

    @property
    def center_index(self):
        return self.n_points // 2

    def refined(self):
        """Same extent, spacing halved."""
        return Grid1D(2 * self.n_points - 1, self.y_min, self.y_max)

    def trapz(self, f, axis=-1):
        return np.trapezoid(f, dx=self.spacing, axis=axis)


@dataclass(frozen=True)
class PotentialSpec:
    """Piecewise-harmonic double well  V(y) = m w0**2 (|y| - a)**2 / 2.

    All fields in internal units.  ``well_separation`` is the half-distance
    between the minima; ``a = 0`` degenerates to a single harmonic well.
    ``step_height`` and ``beam_energy`` describe the longitudinal step and
    play no role in the transverse problem.
    """

    mass: float
    well_separation: float
    well_frequency: float
    step_height: float = 0.0
    beam_energy: float = 0.0

    def __post_init__(self):
        for name in ("mass", "well_separation", "well_frequency", "step_height", "beam_energy"):
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"potential {name} is not finite")
        if self.mass <= 0:
            raise ConfigError("mass must be positive")
        if self.well_frequency <= 0:
            raise ConfigError("well_frequency must be positive")
        if self.well_separation < 0:
            raise ConfigError("well_separation must be >= 0")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return 0.5 * self.mass * self.well_frequency**2 * (np.abs(y) - self.well_separation) ** 2

    @property
    def barrier_height(self):
        return 0.5 * self.mass * self.well_frequency**2 * self.well_separation**2

    @property
    def oscillator_length(self):
        """Ground-state width sqrt(hbar / m w0) of a single well."""
        return 1.0 / math.sqrt(self.mass * self.well_frequency)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    diagonal: np.ndarray
    offdiagonal: np.ndarray
    grid: Grid1D

    def matvec(self, f):
        out = self.diagonal * f
        out[:-1] += self.offdiagonal * f[1:]
        out[1:] += self.offdiagonal * f[:-1]
        return out

    def rayleigh_quotient(self, f):
        f = np.asarray(f, dtype=float)
        return float(f @ self.matvec(f) / (f @ f))

    @property
    def norm_inf(self):
        return float(np.max(np.abs(self.diagonal)) + 2.0 * np.max(np.abs(self.offdiagonal)))

    @property
    def is_mirror_symmetric(self):
        d, e = self.diagonal, self.offdiagonal
        return (
            len(d) % 2 == 1
            and np.array_equal(d, d[::-1])
            and np.array_equal(e, e[::-1])
        )


@dataclass(frozen=True)
class ModePair:
    """Lowest even/odd eigenpair of the transverse problem.

    ``chi_e`` and ``chi_o`` are normalised under the trapezoid rule and both
    positive on the y > 0 side near the right minimum, so that
    (chi_e + chi_o) / sqrt(2) sits in the positive-y well.
    """

    grid: Grid1D
    chi_e: np.ndarray
    chi_o: np.ndarray
    E_e: float
    E_o: float
    mass: float

    @property
    def omega_s(self):
        return self.E_o - self.E_e

    @property
    def E_bar(self):
        return 0.5 * (self.E_e + self.E_o)

    @property
    def J0(self):
        return 0.5 * self.omega_s

    @property
    def period(self):
        return 2.0 * math.pi / self.omega_s

    @property
    def y(self):
        return self.grid.y

    @cached_property
    def phi_plus(self):
        """State localised in the positive-y well."""
        return (self.chi_e + self.chi_o) / math.sqrt(2.0)

    @cached_property
    def phi_minus(self):
        """State localised in the negative-y well; mirror image of phi_plus."""
        return (self.chi_e - self.chi_o) / math.sqrt(2.0)


def build_hamiltonian(grid, pot):
    """Three-point finite-difference Hamiltonian with Dirichlet ends."""
    if not grid.is_symmetric:
        raise ConfigError(
            f"grid must be symmetric about y=0 (y_min = -y_max), got [{grid.y_min}, {grid.y_max}]"
        )
    if grid.n_points % 2 == 0:
        raise ConfigError("grid must contain y=0 exactly: n_points has to be odd")
    y = grid.y
    V = pot(y)
    if not np.all(np.isfinite(V)):
        raise InputError("potential has non-finite values on the grid")
    h = grid.spacing
    step = np.abs(np.diff(V)).max()
    if step > 0.1 * pot.well_frequency:
        warnings.warn(
            f"potential changes by {step:.3g} per cell, more than 0.1*hbar*w0; refine the grid",
            RuntimeWarning,
            stacklevel=2,
        )
    reach = pot.well_separation + 6.0 * pot.oscillator_length
    if grid.y_max < reach:
        warnings.warn(
            f"grid edge {grid.y_max:.4g} um is inside a + 6*l = {reach:.4g} um; "
            "boundary truncation will bias the splitting",
            RuntimeWarning,
            stacklevel=2,
        )
    kin = 1.0 / (2.0 * pot.mass * h * h)
    diag = 2.0 * kin + V
    off = np.full(grid.n_points - 1, -kin)
    return TridiagonalHamiltonian(diag, off, grid)


def _tridiagonal_lowest(d, e, k):
    try:
        w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1), lapack_driver="stebz")
    except (LinAlgError, ValueError) as exc:
        raise NumericError(
            f"tridiagonal eigensolver failed for n={len(d)}, k={k}: {exc}"
        ) from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise NumericError(f"eigensolver returned non-finite values (n={len(d)}, k={k})")
    return w, v


def _sector_solve(H, k):
    # y -> -y symmetry: even sector uses f[-1] = f[1] (scaled to keep it symmetric),
    # odd sector pins f[0] = 0.  Each sector then has a well-separated ground state.
    c = H.grid.center_index
    d = H.diagonal[c:]
    e = H.offdiagonal[c:].copy()
    e[0] *= math.sqrt(2.0)
    ke = (k + 1) // 2
    ko = k // 2
    we, ve = _tridiagonal_lowest(d, e, ke)
    ve[0] *= math.sqrt(2.0)
    even = np.concatenate([ve[:0:-1], ve])
    out = [(we[i], even[:, i]) for i in range(ke)]
    if ko:
        wo, vo = _tridiagonal_lowest(d[1:], H.offdiagonal[c + 1:], ko)
        half = np.vstack([np.zeros((1, ko)), vo])
        odd = np.concatenate([-half[:0:-1], half])
        out += [(wo[i], odd[:, i]) for i in range(ko)]
    out.sort(key=lambda p: p[0])
    return out


def _fix_sign(f, grid):
    right = f[grid.center_index:] if grid.is_symmetric else f
    if right[np.argmax(np.abs(right))] < 0:
        f = -f
    return f


def solve_lowest(H, k=2):
    """Return the ``k`` lowest (energy, eigenvector) pairs, energies ascending.

    Mirror-symmetric operators are split into even and odd blocks first; this
    keeps the nearly degenerate tunnelling pair from mixing numerically.
    Eigenvectors are trapezoid-normalised and made positive at their largest
    excursion on the y > 0 side.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > len(H.diagonal) // 2:
        raise ValueError("k too large for this grid")
    if H.is_mirror_symmetric:
        pairs = _sector_solve(H, k)
    else:
        w, v = _tridiagonal_lowest(H.diagonal, H.offdiagonal, k)
        pairs = [(w[i], v[:, i]) for i in range(k)]
    out = []
    for E, f in pairs:
        f = f / math.sqrt(H.grid.trapz(f * f))
        out.append((float(E), _fix_sign(f, H.grid)))
    return out


def parity_defect(f, sign):
    """max |f(y) - sign*f(-y)| relative to max |f|."""
    return float(np.max(np.abs(f - sign * f[::-1])) / np.max(np.abs(f)))


def classify_parity(f, tol=PARITY_RTOL):
    """+1 for even, -1 for odd, 0 if neither within ``tol``."""
    if parity_defect(f, +1) < tol:
        return 1
    if parity_defect(f, -1) < tol:
        return -1
    return 0


def make_mode_pair(pairs, grid, mass, well_separation=None, operator_scale=0.0):
    """Build a ModePair from the two lowest eigenpairs.

    The splitting must exceed 1e3 eps times the larger of |E_e| and
    ``operator_scale`` (||H||, the absolute accuracy scale of the computed
    eigenvalues); otherwise it is round-off and DegenerateSplittingError is raised.
    """
    if len(pairs) < 2:
        raise ValueError("need at least two eigenpairs")
    (E0, f0), (E1, f1) = pairs[0], pairs[1]
    p0, p1 = classify_parity(f0), classify_parity(f1)
    if (p0, p1) != (1, -1):
        raise ModelViolationError(
            f"lowest two states are not an even/odd pair (parities {p0}, {p1}, "
            f"defects {parity_defect(f0, 1):.2e}/{parity_defect(f1, -1):.2e}); "
            "potential asymmetric or grid too coarse"
        )
    if E1 - E0 < DEGENERACY_FACTOR * np.finfo(float).eps * max(abs(E0), operator_scale):
        raise DegenerateSplittingError(
            f"tunnel splitting {E1 - E0:.3e} is at round-off level of E_e={E0:.6e}; "
            "wells are effectively decoupled at this resolution"
        )
    if well_separation:
        i = grid.center_index + int(round(well_separation / grid.spacing))
        i = min(i, grid.n_points - 1)
        if f0[i] < 0:
            f0 = -f0
        if f1[i] < 0:
            f1 = -f1
    for f in (f0, f1):
        f.setflags(write=False)
    return ModePair(grid, f0, f1, float(E0), float(E1), float(mass))


def solve_modes(grid, pot):
    H = build_hamiltonian(grid, pot)
    return make_mode_pair(solve_lowest(H, 2), grid, pot.mass, pot.well_separation, H.norm_inf)


def solved_period(grid, pot):
    H = build_hamiltonian(grid, pot)
    (E0, _), (E1, _) = solve_lowest(H, 2)
    return 2.0 * math.pi / (E1 - E0) if E1 > E0 else math.inf


# ---------------------------------------------------------------- calibration

_FREE = ("mass", "well_frequency")


def _period_at(grid, pot, name, value):
    # probes may visit shallow wells that overrun the grid; only the result is checked
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return solved_period(grid, pot.with_(**{name: value}))


def _bisect_log(fun, lo, hi, f_lo, rtol, maxiter=200):
    # fun is log(period/target); stop on the period, not the parameter
    for _ in range(maxiter):
        mid = math.sqrt(lo * hi)
        f_mid = fun(mid)
        if abs(f_mid) < rtol:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi / lo - 1.0 < 1e-15:
            return mid
    raise CalibrationError(f"bisection did not converge in {maxiter} iterations")


def calibrate(target_period, free_parameter, pot, grid, bracket, rtol=1e-3, n_probe=7, n_scan=65):
    """Adjust one potential parameter so the solved period equals ``target_period``.

    Bisection (in log space) is used when the period is monotone over the
    bracket, as checked on ``n_probe`` log-spaced points.  Otherwise a
    log-grid scan of ``n_scan`` points locates sign changes and the crossing
    at the largest parameter value is refined by bisection; for
    ``well_frequency`` that is the deep-barrier branch.
    """
    if free_parameter not in _FREE:
        raise ConfigError(f"free_parameter must be one of {_FREE}, got {free_parameter!r}")
    if not target_period > 0:
        raise ConfigError("target period must be positive")
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise ConfigError(f"bad calibration bracket {bracket}")

    current = solved_period(grid, pot)
    if abs(current - target_period) / target_period < rtol:
        return pot

    def f(value):
        return math.log(_period_at(grid, pot, free_parameter, value) / target_period)

    inner_tol = min(rtol, 1e-3) * 1e-4

    probes = np.geomspace(lo, hi, n_probe)
    fp = np.array([f(v) for v in probes])
    d = np.diff(fp)
    if np.all(d > 0) or np.all(d < 0):
        if fp[0] * fp[-1] > 0:
            raise CalibrationError(
                f"target period {target_period:.6g} ps outside achievable range "
                f"[{target_period * math.exp(fp.min()):.6g}, {target_period * math.exp(fp.max()):.6g}] ps "
                f"for {free_parameter} in [{lo:.6g}, {hi:.6g}]"
            )
        value = _bisect_log(f, lo, hi, fp[0], inner_tol)
    else:
        log.info("period not monotone in %s over bracket; scanning", free_parameter)
        scan = np.geomspace(lo, hi, n_scan)
        fs = np.array([f(v) for v in scan])
        roots = np.nonzero(np.sign(fs[:-1]) != np.sign(fs[1:]))[0]
        if len(roots) == 0:
            raise CalibrationError(
                f"target period {target_period:.6g} ps not reached; scanned range "
                f"[{target_period * math.exp(fs.min()):.6g}, {target_period * math.exp(fs.max()):.6g}] ps"
            )
        i = roots[-1]
        value = _bisect_log(f, scan[i], scan[i + 1], fs[i], inner_tol)

    out = pot.with_(**{free_parameter: value})
    achieved = solved_period(grid, out)
    if abs(achieved - target_period) / target_period >= rtol:
        raise CalibrationError(f"calibration ended at period {achieved:.6g} ps")
    log.info("calibrated %s = %.10g (period %.8g ps)", free_parameter, value, achieved)
    return out
