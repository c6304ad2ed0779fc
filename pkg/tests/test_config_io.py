import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoguide import io, units
from twoguide.config import SCHEMA, RunConfig, load_config, parse_config
from twoguide.errors import ConfigError


def test_default_config_matches_schema_defaults():
    assert load_config() == RunConfig()


def test_round_trip_default():
    cfg = load_config()
    assert parse_config(cfg.to_text()) == cfg
    assert parse_config(cfg.to_text()).to_text() == cfg.to_text()


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(1, 50_000).map(lambda k: 2 * k + 1),
    a=st.floats(0.0, 100.0),
    m=st.floats(1e-38, 1e-30),
    seed=st.integers(0, 2**64 - 1),
    auto=st.booleans(),
)
def test_round_trip_property(n, a, m, seed, auto):
    cfg = RunConfig().updated(grid__n_points=n, potential__well_separation_um=a, potential__mass_kg=m,
                              numerics__seed=seed, calibration__auto=auto)
    back = parse_config(cfg.to_text())
    assert back == cfg and back.sha256() == cfg.sha256()


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config key"):
        parse_config("grid.n_pionts = 11\n")


def test_unitless_physical_key_gets_hint():
    with pytest.raises(ConfigError, match="unit suffix.*well_separation_um"):
        parse_config("potential.well_separation = 10\n")


@pytest.mark.parametrize("text", [
    "grid.n_points = eleven",
    "grid.n_points 11",
    "grid.n_points = 11\ngrid.n_points = 13",
    "potential.mass_kg = -1",
    "potential.mass_kg = nan",
    "calibration.free_parameter = barrier",
    "output.format = json",
    "numerics.store_every = 3",
    "grid.y_min_um = 50",
])
def test_bad_values_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\ngrid.n_points = 101  # inline\n")
    assert cfg["grid.n_points"] == 101


def test_hash_changes_with_content():
    a = RunConfig()
    assert a.sha256() == RunConfig().sha256()
    assert a.updated(numerics__seed=1).sha256() != a.sha256()


def test_internal_conversion():
    cfg = RunConfig()
    pot = cfg.build_potential()
    assert pot.mass == pytest.approx(1.5e-36 / units.MASS_UNIT_KG)
    assert pot.well_frequency == pytest.approx(3.255051)
    assert units.internal_to_kg(pot.mass) == pytest.approx(1.5e-36, rel=1e-15)
    assert cfg.build_grid().spacing == pytest.approx(0.002)


def test_schema_physical_keys_have_units():
    unitless = {"grid.n_points", "calibration.auto", "calibration.free_parameter", "calibration.rtol",
                "output.directory", "output.format"}
    for key, (parser, _) in SCHEMA.items():
        if key.startswith(("grid.", "potential.", "longitudinal.")) and key not in unitless:
            assert key.endswith(("_um", "_ps", "_kg", "_J", "_rad_per_s")), key


def test_csv_masked_cells_empty_and_parseable(tmp_path):
    p = tmp_path / "x.csv"
    io.write_csv(p, ["y", "v", "flag"], [np.array([0.0, 1.0]), np.array([math.nan, 2.5]),
                                          np.array([True, False])], {"t": 1.5, "note": "a,b"})
    text = p.read_text().splitlines()
    assert text[0] == "# t=1.5" and text[2] == "y,v,flag"
    rows = list(csv.reader([line for line in text if not line.startswith("#")]))
    assert rows[1] == ["0.0", "", "1"] and rows[2] == ["1.0", "2.5", "0"]
    meta, cols = io.read_columns(p)
    assert meta["t"] == "1.5" and np.isnan(cols["v"][0]) and cols["v"][1] == 2.5


def test_csv_floats_round_trip(tmp_path):
    x = np.random.default_rng(0).normal(size=50) * 1e-20
    p = tmp_path / "r.csv"
    io.write_csv(p, ["x"], [x])
    assert np.array_equal(io.read_columns(p)[1]["x"], x)


def test_report_round_trip(tmp_path):
    p = io.write_report(tmp_path / "r.txt", {"a": 1, "b": 0.25, "c": "pass"})
    assert io.read_report(p) == {"a": "1", "b": "0.25", "c": "pass"}


def test_lockfile_guards_directory(tmp_path):
    with io.locked_dir(tmp_path / "run") as d:
        assert (d / ".lock").exists()
        with pytest.raises(ConfigError, match="locked"):
            with io.locked_dir(tmp_path / "run"):
                pass
    assert not (tmp_path / "run" / ".lock").exists()
