import csv
import hashlib
import json

import numpy as np
import pytest

from ehplan.cli.config import ConfigError, RunConfig, load_config
from ehplan.cli.main import main
from ehplan.cli.yeardata import YEAR_HEADER, DataError, ingest_year, solar_elevation_sin, synth_year, write_year
from ehplan.scenarios import YearSeries


def write_rows(path, rows, header=YEAR_HEADER):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def flat_rows(hours, e=0.0, h=0.0, c=0.0, wind=5.0, irr=0.0, price=500.0):
    return [[t, e, h, c, wind, irr, price] for t in range(hours)]


# ingestion

def test_ingest_round_trip(tmp_path):
    year = synth_year(3, days=4)
    path = tmp_path / "y.csv"
    write_year(year, path)
    back = ingest_year(path)
    for name in ("load_e", "load_h", "load_c", "wind_speed", "irradiance", "price_e"):
        assert np.allclose(getattr(back, name), getattr(year, name), atol=1e-6)
    assert path.read_text().splitlines()[0] == ",".join(YEAR_HEADER)


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda rows: rows.__setitem__(5, rows[5][:-1]), ":7:"),
        (lambda rows: rows[9].__setitem__(1, -1.0), ":11:"),
        (lambda rows: rows[3].__setitem__(0, 7), ":5:"),
        (lambda rows: rows[2].__setitem__(4, "fast"), ":4:"),
    ],
)
def test_ingest_errors_carry_line_numbers(tmp_path, mutate, where):
    rows = flat_rows(24)
    mutate(rows)
    with pytest.raises(DataError, match=where):
        ingest_year(write_rows(tmp_path / "y.csv", rows))


def test_ingest_bad_header_and_empty(tmp_path):
    with pytest.raises(DataError, match=":1:"):
        ingest_year(write_rows(tmp_path / "a.csv", flat_rows(24), header=("hour", "load")))
    with pytest.raises(DataError, match="no data rows"):
        ingest_year(write_rows(tmp_path / "b.csv", []))
    with pytest.raises(DataError, match="not found"):
        ingest_year(tmp_path / "missing.csv")


def test_ingest_partial_day(tmp_path):
    with pytest.raises(DataError):
        ingest_year(write_rows(tmp_path / "y.csv", flat_rows(8761)))


# synthetic year

def test_synth_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_year(synth_year(7), a)
    write_year(synth_year(7), b)
    assert a.read_bytes() == b.read_bytes()
    assert not np.array_equal(synth_year(8).load_e, synth_year(7).load_e)


def test_synth_shape_and_night():
    year = synth_year(0)
    assert isinstance(year, YearSeries) and year.n_days == 365
    irr = year.irradiance.reshape(365, 24)
    assert np.all(irr[:, :4] == 0) and np.all(irr[:, 21:] == 0)
    assert irr.max() <= 1100
    for name in ("load_e", "load_h", "load_c", "wind_speed"):
        assert getattr(year, name).min() >= 0
    price = year.price_e.reshape(365, 24)
    assert price[0, 3] == 350.0 and price[0, 12] == 850.0


def test_solar_geometry():
    # noon at the June solstice beats noon at the December one; midnight is dark
    assert solar_elevation_sin(np.array([172]), np.array([12]))[0] > solar_elevation_sin(np.array([355]), np.array([12]))[0]
    assert solar_elevation_sin(np.array([172]), np.array([0]))[0] <= 0


# configuration

def test_config_defaults_and_overrides(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("alpha: 0.9\nsweep_betas: [0.2, 0.8]\n")
    cfg = load_config(path, {"beta": "0.7", "ladder_targets": "5,10"})
    assert (cfg.alpha, cfg.beta) == (0.9, 0.7)
    assert cfg.sweep_betas == [0.2, 0.8] and cfg.ladder_targets == [5, 10]
    assert cfg.gas_price == pytest.approx(340.0)
    assert cfg.shed_cost == (2000.0, 1800.0, 1800.0)


@pytest.mark.parametrize(
    "text",
    ["alpha: 1.0\n", "beta: -0.1\n", "no_such_key: 1\n", "gap: fast\n", "case: case9\n",
     "reduction_method: magic\n", "- 1\n- 2\n"],
)
def test_config_errors(tmp_path, text):
    path = tmp_path / "c.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_from_manifest(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"verb": "plan", "config": RunConfig(beta=0.3).to_dict()}))
    assert load_config(path).beta == 0.3


# verbs and exit codes

@pytest.fixture
def zero_year(tmp_path):
    return write_rows(tmp_path / "zero.csv", flat_rows(48))


def _run(*argv):
    return main([str(a) for a in argv])


def test_plan_zero_load_case1(tmp_path, zero_year, capsys):
    out = tmp_path / "run"
    code = _run("plan", "--year-path", zero_year, "--case", "case1", "--beta", 0, "--output-dir", out,
                "--reduction-target", 2)
    assert code == 0
    rows = {r[0]: r[1] for r in csv.reader(open(out / "costs.csv"))}
    assert rows["trading_cost"] == rows["maintenance_cost"] == rows["load_shedding_cost"] == "0.00"
    assert float(rows["investment_cost"]) > 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["verb"] == "plan" and manifest["config"]["case"] == "case1"
    assert manifest["seeds"] == {"synth_seed": 0, "reduction_seed": 0}
    for name, digest in manifest["outputs"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    assert "objective" in capsys.readouterr().out


def test_audit_verb(tmp_path, zero_year):
    out = tmp_path / "run"
    assert _run("plan", "--year-path", zero_year, "--output-dir", out, "--reduction-target", 2) == 0
    assert _run("audit", out) == 0
    assert (out / "audit.csv").read_text().splitlines() == ["kind,constraint,eq,scenario,step,option,amount"]
    with np.load(out / "solution.npz") as z:
        data = dict(z)
    data["shed"][0, 0, 0] = 5.0
    np.savez(out / "tampered.npz", **data)
    assert _run("audit", out, "--solution", out / "tampered.npz") == 4
    assert "balance_e" in (out / "audit.csv").read_text()


def test_reduce_verb(tmp_path):
    year = write_rows(tmp_path / "y.csv", [[t, 1 + t % 24 + (t // 24), 1, 1, 5, 0, 500] for t in range(24 * 6)])
    out = tmp_path / "red"
    assert _run("reduce", "--year-path", year, "--output-dir", out, "--reduction-target", 3) == 0
    probs = [float(r["prob"]) for r in csv.DictReader(open(out / "reduced_set.csv"))]
    assert len(probs) == 3 and sum(probs) == pytest.approx(1.0, abs=1e-12)
    assert len((out / "reduction_trace.csv").read_text().splitlines()) == 4


def test_synth_verb(tmp_path):
    path = tmp_path / "year.csv"
    assert _run("synth", path, "--synth-seed", 4) == 0
    assert ingest_year(path).n_days == 365


def test_exit_codes(tmp_path, zero_year, capsys):
    assert _run("plan", "--alpha", 1.5, "--output-dir", tmp_path / "x") == 2
    assert _run("plan", "--year-path", tmp_path / "missing.csv", "--output-dir", tmp_path / "x") == 2
    broken = write_rows(tmp_path / "broken.csv", flat_rows(30))
    assert _run("plan", "--year-path", broken, "--output-dir", tmp_path / "x") == 3
    catalog = tmp_path / "cat.yaml"
    catalog.write_text(
        "devices:\n"
        "  - {kind: TX, capacity_id: t1, capacity_mw: 5.0, invest_cost: 3.0e+5, maintenance_rate: 10.0}\n"
        "coupling:\n"
        "  TX: [[0.98, 0.0], [0.0, 0.0], [0.0, 0.0]]\n"
    )
    code = _run("plan", "--year-path", zero_year, "--catalog-path", catalog, "--output-dir", tmp_path / "y",
                "--reduction-target", 2)
    assert code == 4
    assert "CCHP" in capsys.readouterr().err
    assert _run("audit", tmp_path / "nowhere") == 2
