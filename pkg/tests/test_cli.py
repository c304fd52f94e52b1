import csv
import io
import json

import pytest

from bosonic_nogo.cli import main
from bosonic_nogo.errors import ConfigParseError
from bosonic_nogo.scenarios import SCENARIOS, parse_config, points, render, run_scenario


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_commutation_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "commutation", "--kappa", "0.1,0.5,0.9", "--N", "0.1,1,2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 9
    assert all(r["passed"] == "true" and float(r["defect"]) < 1e-8 for r in rows)
    # declared order: kappa is the outer loop
    assert [float(r["kappa"]) for r in rows[:3]] == [0.1, 0.1, 0.1]
    assert [float(r["N"]) for r in rows[:3]] == [0.1, 1.0, 2.0]


def test_qidc_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "qidc", "--Ns", "0.1,0.5,1,10", "--N", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"] == {"points": 4, "failed": 0, "passed": True}
    for r in doc["results"]:
        assert r["classical"] is True and abs(r["min_eigenvalue"]) < 1e-10
        assert abs(r["threshold"] - 1.0) < 1e-8


def test_qidc_below_threshold_is_nonclassical(capsys):
    code, out, _ = run(capsys, "sweep", "qidc", "--N", "0.5,0.99", "--format", "json")
    assert code == 0
    assert not any(r["classical"] for r in json.loads(out)["results"])


def test_empty_range_is_a_parse_error(capsys):
    code, _, err = run(capsys, "sweep", "commutation", "--kappa", "")
    assert code == 2 and "ConfigParseError" in err
    with pytest.raises(ConfigParseError):
        parse_config({"scenario": "commutation", "params": {"kappa": []}})


@pytest.mark.parametrize("raw", [
    {"scenario": "nope"},
    {"scenario": "commutation", "params": {"alpha": [1.0]}},
    {"scenario": "commutation", "format": "xml"},
    {"scenario": "commutation", "bogus": 1},
    {"scenario": "commutation", "cutoff": 1},
    {"scenario": "commutation", "params": {"kappa": ["a"]}},
    {"scenario": "power", "params": {"Nmax": [1.0, 2.0]}},
])
def test_bad_configs(raw):
    with pytest.raises(ConfigParseError):
        parse_config(raw)


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "theorem2", "params": {"N": [0.1, 0.2], "alpha": [0.5]},
                               "format": "json", "cutoff": 40}))
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--N", "0.3")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["params"] == {"alpha": [0.5], "N": [0.3]}
    assert doc["config"]["cutoff"] == 40
    assert len(doc["results"]) == 1


def test_determinism_and_workers(tmp_path, capsys):
    outs = []
    for i, workers in enumerate(("1", "1", "4")):
        path = tmp_path / f"o{i}.json"
        code, _, _ = run(capsys, "sweep", "theorem5", "--format", "json", "--out", str(path), "--workers", workers)
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_every_default_scenario_passes():
    for name in SCENARIOS:
        if name == "classicalization":
            continue  # exercised by the acceptance suite
        res = run_scenario(parse_config({"scenario": name}))
        assert res.passed, name
        assert len(res.rows) == len(points(parse_config({"scenario": name})))


def test_theorem4_rows_record_both_readings():
    res = run_scenario(parse_config({"scenario": "theorem4", "params": {"d1": [0.0], "d2": [0.1]}}))
    for row in res.rows:
        assert row["passed"]
        assert "bound_printed" in row and "printed_satisfied" in row


def test_csv_render_format():
    res = run_scenario(parse_config({"scenario": "power", "params": {"W": [1e15]}}))
    text = render(res, "csv")
    header, line = text.strip().split("\n")
    assert header.split(",")[0] == "Ns"
    assert line.endswith(",true")


def test_power_subcommand(capsys):
    code, out, _ = run(capsys, "power", "--Ns", "1", "--W", "1e15", "--wavelength", "1e-6")
    assert code == 0
    row = json.loads(out)["results"][0]
    assert row["power_dbm"] == pytest.approx(-7.019, abs=1e-3)
    code, _, _ = run(capsys, "power", "--Ns", "5", "--W", "1e15", "--wavelength", "1e-6", "--Nmax", "1", "--Pmax", "1e-9")
    assert code == 1
    code, _, err = run(capsys, "power", "--Ns", "-1", "--W", "1e15", "--wavelength", "1e-6")
    assert code == 2 and "InvalidParameter" in err


def test_unknown_extra_flag(capsys):
    code, _, err = run(capsys, "sweep", "commutation", "--alpha", "1")
    assert code == 2 and "alpha" in err
