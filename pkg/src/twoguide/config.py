"""Run configuration: flat ``section.key_unit = value`` text files.

Physical quantities carry their unit in the key suffix (``_um``, ``_ps``,
``_kg``, ``_J``, ``_rad_per_s``).  Unknown keys are rejected.  Values are kept
as written (SI or the suffixed unit); conversion to internal units happens in
the ``build_*`` helpers.
"""
import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources

from . import units
from .eigensolver import Grid1D, PotentialSpec
from .errors import ConfigError
from .xaxis import LongitudinalConfig


def _bool(text):
    t = str(text).strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _str(text):
    return str(text).strip()


# key -> (parser, default)
SCHEMA = {
    "grid.n_points": (int, 40001),
    "grid.y_min_um": (float, -40.0),
    "grid.y_max_um": (float, 40.0),
    "potential.mass_kg": (float, 1.5e-36),
    "potential.well_separation_um": (float, 10.0),
    "potential.well_frequency_rad_per_s": (float, 3.255051e12),
    "longitudinal.step_height_J": (float, 1.0e-21),
    "longitudinal.beam_energy_J": (float, 1.2e-21),
    "calibration.auto": (_bool, True),
    "calibration.target_period_ps": (float, 80.0),
    "calibration.free_parameter": (_str, "well_frequency"),
    "calibration.rtol": (float, 1e-3),
    "calibration.well_frequency_low_rad_per_s": (float, 1.0e12),
    "calibration.well_frequency_high_rad_per_s": (float, 1.0e14),
    "calibration.mass_low_kg": (float, 1.0e-37),
    "calibration.mass_high_kg": (float, 1.0e-34),
    "numerics.eps_rho": (float, 1e-12),
    "numerics.tol_identity": (float, 1e-6),
    "numerics.t_samples": (int, 81),
    "numerics.population_samples": (int, 401),
    "numerics.continuity_steps_per_period": (int, 1000),
    "numerics.n_traj": (int, 10000),
    "numerics.steps_per_period": (int, 2000),
    "numerics.store_every": (int, 50),
    "numerics.hist_bin_um": (float, 1.0),
    "numerics.seed": (int, 20240917),
    "numerics.speed_window_um": (float, 5.0),
    "numerics.phasemap_y_stride": (int, 20),
    "numerics.x_samples": (int, 201),
    "numerics.x_max_um": (float, 1300.0),
    "output.directory": (_str, "runs"),
    "output.format": (_str, "csv"),
}

SECTIONS = ("grid", "potential", "longitudinal", "calibration", "numerics", "output")
_UNIT_SUFFIXES = ("_um", "_ps", "_kg", "_J", "_rad_per_s")


def _suggest(key):
    base = key.split(".")[0]
    hits = [k for k in SCHEMA if k.startswith(key + "_") and k.split(".")[0] == base]
    if hits:
        return f"; physical quantities need a unit suffix, did you mean {hits[0]!r}?"
    return ""


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k: d for k, (_, d) in SCHEMA.items()})

    def __getitem__(self, key):
        return self.values[key]

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values

    def updated(self, **changes):
        """Copy with dotted keys replaced; use ``__`` for the dot in keyword names."""
        v = dict(self.values)
        for k, val in changes.items():
            key = k.replace("__", ".")
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            v[key] = SCHEMA[key][0](val)
        cfg = RunConfig(v)
        cfg.validate()
        return cfg

    def validate(self):
        v = self.values
        if v["grid.n_points"] < 3:
            raise ConfigError("grid.n_points must be >= 3")
        for key, (parser, _) in SCHEMA.items():
            if parser is float and not math.isfinite(v[key]):
                raise ConfigError(f"{key} must be finite")
        if v["grid.y_max_um"] <= v["grid.y_min_um"]:
            raise ConfigError("grid.y_max_um must exceed grid.y_min_um")
        for key in ("potential.mass_kg", "potential.well_frequency_rad_per_s",
                    "calibration.target_period_ps", "numerics.eps_rho", "numerics.tol_identity",
                    "numerics.hist_bin_um"):
            if v[key] <= 0:
                raise ConfigError(f"{key} must be positive")
        if v["calibration.free_parameter"] not in ("mass", "well_frequency"):
            raise ConfigError("calibration.free_parameter must be 'mass' or 'well_frequency'")
        if v["output.format"] != "csv":
            raise ConfigError("output.format must be 'csv'")
        for key in ("numerics.t_samples", "numerics.n_traj", "numerics.steps_per_period",
                    "numerics.store_every", "numerics.population_samples",
                    "numerics.continuity_steps_per_period", "numerics.phasemap_y_stride",
                    "numerics.x_samples"):
            if v[key] < 1:
                raise ConfigError(f"{key} must be >= 1")
        if v["numerics.steps_per_period"] % v["numerics.store_every"]:
            raise ConfigError("numerics.store_every must divide numerics.steps_per_period")

    # -------------------------------------------------------------- text form

    def to_text(self):
        lines = []
        for section in SECTIONS:
            lines.append(f"# {section}")
            for key in SCHEMA:
                if key.startswith(section + "."):
                    lines.append(f"{key} = {_format(self.values[key])}")
            lines.append("")
        return "\n".join(lines)

    def sha256(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    # -------------------------------------------------------- internal objects

    def build_grid(self):
        return Grid1D(self["grid.n_points"], self["grid.y_min_um"], self["grid.y_max_um"])

    def build_potential(self):
        v = self.values
        return PotentialSpec(
            mass=units.kg_to_internal(v["potential.mass_kg"]),
            well_separation=v["potential.well_separation_um"],
            well_frequency=units.rad_per_s_to_internal(v["potential.well_frequency_rad_per_s"]),
            step_height=units.joule_to_internal(v["longitudinal.step_height_J"]),
            beam_energy=units.joule_to_internal(v["longitudinal.beam_energy_J"]),
        )

    def build_longitudinal(self, mass=None):
        pot = self.build_potential()
        return LongitudinalConfig(pot.mass if mass is None else mass, pot.step_height, pot.beam_energy)

    def calibration_bracket(self):
        v = self.values
        if v["calibration.free_parameter"] == "mass":
            return (units.kg_to_internal(v["calibration.mass_low_kg"]),
                    units.kg_to_internal(v["calibration.mass_high_kg"]))
        return (units.rad_per_s_to_internal(v["calibration.well_frequency_low_rad_per_s"]),
                units.rad_per_s_to_internal(v["calibration.well_frequency_high_rad_per_s"]))

    def with_potential(self, pot):
        """Copy carrying the (calibrated) potential parameters back in SI."""
        return self.updated(
            potential__mass_kg=units.internal_to_kg(pot.mass),
            potential__well_frequency_rad_per_s=units.internal_to_rad_per_s(pot.well_frequency),
        )


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text, source="<string>"):
    values = {k: d for k, (_, d) in SCHEMA.items()}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}{_suggest(key)}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    cfg = RunConfig(values)
    cfg.validate()
    return cfg


def load_config(path=None):
    """Load ``path``, or the shipped default when ``path`` is None."""
    if path is None:
        text = resources.files("twoguide").joinpath("data/default.cfg").read_text()
        return parse_config(text, "default.cfg")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def has_unit_suffix(key):
    return key.endswith(_UNIT_SUFFIXES)
