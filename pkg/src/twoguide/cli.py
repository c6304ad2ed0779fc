"""Command-line entry point: ``twoguide <verb> [--config F] [--out DIR] [--seed N]``.

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 invariant failure.
"""
import argparse
import logging
import sys
import warnings

import numpy as np

from . import __version__, bohmian, checks, dynamics, io, kernels, units, xaxis
from .config import load_config
from .eigensolver import build_hamiltonian, calibrate, classify_parity, solve_lowest, solve_modes
from .errors import ConfigError, InvariantError, TwoGuideError

log = logging.getLogger("twoguide")

FIT_WINDOW = (0.01, 0.1)  # w_s t range of the small-time power-law fit


# ------------------------------------------------------------------ pipeline

class Run:
    """Config, grid, (calibrated) potential and modes for one invocation."""

    def __init__(self, cfg, calibrate_now=None):
        self.grid = cfg.build_grid()
        pot = cfg.build_potential()
        do_cal = cfg["calibration.auto"] if calibrate_now is None else calibrate_now
        if do_cal:
            pot = calibrate(
                cfg["calibration.target_period_ps"], cfg["calibration.free_parameter"], pot, self.grid,
                cfg.calibration_bracket(), rtol=cfg["calibration.rtol"],
            )
            cfg = cfg.with_potential(pot)
        self.calibrated = do_cal
        self.cfg = cfg
        self.pot = pot
        self.modes = solve_modes(self.grid, pot)

    def metadata(self):
        m = self.modes
        return {
            "config_sha256": self.cfg.sha256(),
            "E_e_J": units.internal_to_joule(m.E_e),
            "E_o_J": units.internal_to_joule(m.E_o),
            "omega_s_rad_per_s": units.internal_to_rad_per_s(m.omega_s),
            "period_ps": m.period,
        }


def _write_run_metadata(out, run, verb, extra=None):
    items = {
        "twoguide_version": __version__,
        "verb": verb,
        "config_sha256": run.cfg.sha256(),
        "calibrated": run.calibrated,
        "kernel_backend": kernels.BACKEND,
        "gauge": dynamics.GAUGE,
        "mass_kg": run.cfg["potential.mass_kg"],
        "well_frequency_rad_per_s": run.cfg["potential.well_frequency_rad_per_s"],
        "period_ps": run.modes.period,
    }
    items.update({f"unit.{k}": v for k, v in units.conversion_table().items()})
    items.update(extra or {})
    io.write_report(out / "run_metadata.txt", items)
    (out / "config.cfg").write_text(run.cfg.to_text())


# ---------------------------------------------------------------------- verbs

def cmd_eigs(run, out, args):
    m = run.modes
    meta = run.metadata()
    io.write_csv(out / "eigs.csv", ["y", "chi_e", "chi_o"], [m.y, m.chi_e, m.chi_o], meta)
    if args.levels:
        pairs = solve_lowest(build_hamiltonian(run.grid, run.pot), max(2, args.levels))[: args.levels]
        E = np.array([p[0] for p in pairs])
        io.write_csv(
            out / "levels.csv",
            ["n", "E_J", "E_rad_per_s", "parity"],
            [np.arange(len(E)), units.internal_to_joule(E), units.internal_to_rad_per_s(E),
             np.array([classify_parity(p[1]) for p in pairs])],
            {"config_sha256": run.cfg.sha256(),
             "well_frequency_rad_per_s": run.cfg["potential.well_frequency_rad_per_s"]},
        )
    print(f"omega_s = {meta['omega_s_rad_per_s']:.9g} rad/s, period = {m.period:.9g} ps")


def cmd_calibrate(run, out, args):
    cfg = run.cfg
    io.write_report(out / "calibration.txt", {
        "free_parameter": cfg["calibration.free_parameter"],
        "mass_kg": cfg["potential.mass_kg"],
        "well_frequency_rad_per_s": cfg["potential.well_frequency_rad_per_s"],
        "well_separation_um": cfg["potential.well_separation_um"],
        "target_period_ps": cfg["calibration.target_period_ps"],
        "period_ps": run.modes.period,
        "relative_error": abs(run.modes.period / cfg["calibration.target_period_ps"] - 1.0),
        "barrier_height_J": units.internal_to_joule(run.pot.barrier_height),
        "oscillator_length_um": run.pot.oscillator_length,
    })
    (out / "calibrated.cfg").write_text(cfg.to_text())
    print(f"{cfg['calibration.free_parameter']} calibrated: period = {run.modes.period:.9g} ps")


def phasemap_data(modes, t_samples, stride, eps_rho):
    """(y, t, matrix of dS/dy) with NaN on masked cells."""
    ts = np.linspace(0.0, modes.period, t_samples)
    rows = slice(None, None, stride)
    y = modes.y[rows]
    mat = np.empty((y.size, ts.size))
    for j, t in enumerate(ts):
        mat[:, j] = dynamics.snapshot(modes, t, eps_rho).dS_dy[rows]
    return y, ts, mat


def map_support(y, mat, frac=0.1):
    """Largest |y| of cells with |dS/dy| above ``frac`` of the map peak."""
    a = np.abs(np.nan_to_num(mat))
    hit = np.any(a > frac * a.max(), axis=1)
    return float(np.max(np.abs(y[hit])))


def cmd_phasemap(run, out, args):
    cfg, m = run.cfg, run.modes
    y, ts, mat = phasemap_data(m, cfg["numerics.t_samples"], cfg["numerics.phasemap_y_stride"],
                               cfg["numerics.eps_rho"])
    meta = run.metadata()
    meta.update({"units": "dS_dy in 1/um, y in um, header t values in ps",
                 "gauge": dynamics.GAUGE, "eps_rho": cfg["numerics.eps_rho"]})
    io.write_matrix_csv(out / "phasemap.csv", "y", y, ts, mat, meta)

    w = cfg["numerics.speed_window_um"]
    st = bohmian.speed_statistics(m, window=(-w, w), eps_rho=cfg["numerics.eps_rho"])
    c = np.argmin(np.abs(y))
    io.write_report(out / "speed_stats.txt", {
        "window_um": w,
        "t_range_ps": f"0:{m.period!r}",
        "mean_abs_v_uniform_m_per_s": st.mean_abs_v_uniform,
        "mean_abs_v_rho_weighted_m_per_s": st.mean_abs_v_rho_weighted,
        "peak_abs_v_m_per_s": st.peak_abs_v,
        "n_cells": st.n_cells,
        "support_max_abs_y_um": map_support(y, mat),
        "mid_channel_dS_dy_first_step": mat[c, 1],
    })
    print(f"<|v|> uniform {st.mean_abs_v_uniform:.4g}, rho-weighted {st.mean_abs_v_rho_weighted:.4g}, "
          f"peak {st.peak_abs_v:.4g} m/s")


def fit_small_time(modes, n=41):
    """Slope and prefactor ratio of the transferred population over FIT_WINDOW."""
    ws = np.geomspace(*FIT_WINDOW, n)
    t = ws / modes.omega_s
    slope, pref = dynamics.power_law_fit(t, dynamics.transferred_population(modes, t))
    return slope, pref / (modes.omega_s**2 / 4.0)


def cmd_populations(run, out, args):
    m = run.modes
    ts = np.linspace(0.0, m.period, run.cfg["numerics.population_samples"])
    pp, pm = dynamics.population_series(m, ts)
    oracle = np.sin(m.J0 * ts) ** 2
    slope, curv = fit_small_time(m)
    meta = run.metadata()
    meta.update({
        "J0_rad_per_s": units.internal_to_rad_per_s(m.J0),
        "fit_window_omega_s_t": f"{FIT_WINDOW[0]}:{FIT_WINDOW[1]}",
        "fit_slope": slope,
        "fit_prefactor_over_omega_s_sq_over_4": curv,
        "max_abs_oracle_minus_full": float(np.max(np.abs(oracle - pm))),
        "p_minus_at_0": pm[0],
    })
    io.write_csv(out / "populations.csv", ["t", "p_plus", "p_minus", "two_level_p_minus"],
                 [ts, pp, pm, oracle], meta)
    print(f"small-time slope {slope:.4f}, prefactor ratio {curv:.4f}")


def _longitudinal_meta(lcfg, modes):
    k = xaxis.k2(lcfg)
    vx = xaxis.group_velocity(lcfg)
    return {
        "E_J": units.internal_to_joule(lcfg.beam_energy),
        "V0_J": units.internal_to_joule(lcfg.step_height),
        "detuning_J": units.internal_to_joule(lcfg.detuning),
        "k2_re_per_um": k.real,
        "k2_im_per_um": k.imag,
        "vx_re_m_per_s": units.velocity_to_m_per_s(vx.real),
        "vx_im_m_per_s": units.velocity_to_m_per_s(vx.imag),
        "J0_rad_per_s": units.internal_to_rad_per_s(modes.J0),
    }


def cmd_xprofile(run, out, args):
    cfg, m = run.cfg, run.modes
    lcfg = cfg.build_longitudinal(run.pot.mass)
    n = cfg["numerics.x_samples"]
    if args.regime == "oscillating":
        xs = np.linspace(0.0, cfg["numerics.x_max_um"], n)
        prof = xaxis.rho_a_profile(xs, lcfg, m)
        weighted = prof[:, 1] * xaxis.plane_wave_density(xs, lcfg)
        meta = run.metadata()
        meta.update(_longitudinal_meta(lcfg, m))
        meta["quadratic_coefficient_per_um2"] = xaxis.quadratic_coefficient(lcfg, m)
        meta["rho_a"] = "p_minus(x/vx) - p_minus(0)"
        io.write_csv(out / "xprofile_oscillating.csv", ["x", "rho_a", "rho_a_weighted"],
                     [xs, prof[:, 1], weighted], meta)
    else:
        if args.energy_from_config:
            ev = lcfg
        else:
            ev = xaxis.special_config(m, lcfg.step_height, lcfg.mass)
        xaxis.check_special_detuning(ev, m)
        xs = np.linspace(0.0, cfg["numerics.x_max_um"], n)
        prof = xaxis.damped_profiles(xs, ev, m, phase_rate=args.phase_rate)
        kin, quarter = xaxis.evanescent_rates(ev, m)
        meta = run.metadata()
        meta.update(_longitudinal_meta(ev, m))
        meta.update({"phase_rate": args.phase_rate, "rate_J0_over_vx_per_um": kin,
                     "rate_k2_over_4_per_um": quarter})
        io.write_csv(out / "xprofile_evanescent.csv", ["x", "psi_m_sq", "psi_a_sq"],
                     [prof[:, 0], prof[:, 1], prof[:, 2]], meta)
    print(f"{args.regime} profile: {n} samples")


def cmd_trajectories(run, out, args):
    cfg, m = run.cfg, run.modes
    T = m.period
    field = bohmian.velocity_field(m, eps_rho=cfg["numerics.eps_rho"])
    dt = T / cfg["numerics.steps_per_period"]
    ens = bohmian.integrate_trajectories(field, cfg["numerics.n_traj"], T, dt, cfg["numerics.seed"],
                                         store_every=cfg["numerics.store_every"])
    n, k = ens.positions.shape
    meta = run.metadata()
    meta.update({"seed": ens.seed, "dt_ps": dt, "n_traj": n, "exit_count": ens.exit_count,
                 "floor_flag_count": ens.floor_hits})
    io.write_csv(out / "trajectories.csv", ["traj_id", "t", "y"],
                 [np.repeat(np.arange(n), k), np.tile(ens.times, n), ens.positions.ravel()], meta)
    bw = cfg["numerics.hist_bin_um"]
    report = {"seed": ens.seed, "dt_ps": dt, "n_traj": n, "backend": ens.backend,
              "exit_count": ens.exit_count, "floor_flag_count": ens.floor_hits,
              "hist_bin_um": bw,
              "sampling_noise_L1": bohmian.sampling_noise_estimate(m, n, bw)}
    for label, t in (("0", 0.0), ("T/4", T / 4), ("T/2", T / 2), ("T", T)):
        report[f"equivariance_L1_{label}"] = bohmian.equivariance_distance(ens, m, t, bw)
    report["non_crossing"] = "pass" if bohmian.non_crossing(ens) else "fail"
    io.write_report(out / "trajectories_report.txt", report)
    print(f"non-crossing {report['non_crossing']}, L1(T/4) = {report['equivariance_L1_T/4']:.4f}")


def cmd_check(run, out, args):
    results = checks.run_checks(run.cfg, run.modes, run.pot, run.grid, run.calibrated)
    io.write_csv(
        out / "check_report.csv",
        ["check", "module", "status", "value", "threshold", "detail"],
        [[r.name for r in results], [r.module for r in results], [r.status for r in results],
         np.array([r.value for r in results]), np.array([r.threshold for r in results]),
         [r.detail for r in results]],
        {"config_sha256": run.cfg.sha256()},
    )
    for r in results:
        print(f"{r.status:4s}  {r.module:11s} {r.name}  {r.value:.4g}  {r.detail}".rstrip())
    failed = [r.name for r in results if r.status == "fail"]
    if failed:
        raise InvariantError(f"{len(failed)} invariant check(s) failed: {', '.join(failed)}")


VERBS = {
    "eigs": cmd_eigs,
    "calibrate": cmd_calibrate,
    "phasemap": cmd_phasemap,
    "populations": cmd_populations,
    "xprofile": cmd_xprofile,
    "trajectories": cmd_trajectories,
    "check": cmd_check,
}


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file (default: shipped default)")
    common.add_argument("--out", help="output directory (default: output.directory/<verb>)")
    common.add_argument("--seed", type=_u64, help="override numerics.seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="twoguide", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="verb", required=True)
    e = sub.add_parser("eigs", parents=[common], help="lowest even/odd pair")
    e.add_argument("--levels", type=int, default=0, help="also write the lowest N levels")
    sub.add_parser("calibrate", parents=[common], help="fit the free parameter to the target period")
    sub.add_parser("phasemap", parents=[common], help="dS/dy over (y, t) and speed statistics")
    sub.add_parser("populations", parents=[common], help="well populations against time")
    x = sub.add_parser("xprofile", parents=[common], help="guide populations along x")
    x.add_argument("--regime", choices=("oscillating", "evanescent"), default="oscillating")
    x.add_argument("--energy-from-config", action="store_true",
                   help="evanescent: use the configured beam energy instead of detuning -hbar*J0")
    x.add_argument("--phase-rate", choices=("kinematic", "quarter"), default="kinematic")
    sub.add_parser("trajectories", parents=[common], help="Bohmian ensemble and equivariance report")
    sub.add_parser("check", parents=[common], help="run the invariant suite")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.updated(numerics__seed=args.seed)
        if args.verb == "eigs" and args.levels < 0:
            raise ConfigError("--levels must be non-negative")
        out_dir = args.out or f"{cfg['output.directory']}/{args.verb}"
        with io.locked_dir(out_dir) as out:
            with warnings.catch_warnings():
                warnings.simplefilter("default")
                run = Run(cfg, calibrate_now=True if args.verb == "calibrate" else None)
                _write_run_metadata(out, run, args.verb)
                VERBS[args.verb](run, out, args)
    except TwoGuideError as exc:
        print(f"twoguide: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
