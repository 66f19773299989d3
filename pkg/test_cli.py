#!/usr/bin/env python3
"""
Tests for the qa-classes command line: subcommands, exit codes and
report rendering
"""

import csv
import io
import json
import math
from pathlib import Path

import pytest

from cli import main
from verdicts import OPEN_PROBLEM_NOTE

CONFIGS = Path(__file__).parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def error_payload(err: str) -> dict:
    return json.loads(err[err.index("{\n"):])["error"]


def write_config(tmp_path, payload, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


# -- sequence ------------------------------------------------------------------------------


def test_sequence_report_for_gevrey(capsys):
    code, report = run_json(capsys, "sequence", "--config", str(CONFIGS / "gevrey1.json"))
    assert code == 0
    assert report["schema"] == "1"
    assert report["command"] == "sequence"
    assert report["errors"] == []
    result = report["result"]
    assert result["P"] == 1024
    for axiom in ("log_convexity", "moderate_growth", "strong_non_quasianalyticity"):
        assert result["axioms"][axiom]["holds"] is True
    assert result["growth_index"]["gamma_hat"] == pytest.approx(1.0, abs=0.1)
    assert result["series_route"] == {"available": True}
    assert result["equivalent_quotients"]["gamma"] == pytest.approx(0.95 * result["growth_index"]["gamma_hat"])
    assert result["equivalent_quotients"]["factor"] >= 1.0
    assert result["equivalent_quotients"]["checked_range"] == 1024
    table = result["ostrowski"]
    assert len(table) == report["config"]["t_points"]
    assert [row["r"] for row in table] == sorted(row["r"] for row in table)
    assert all(row["log_T_tilde"] <= row["log_T"] for row in table)


def test_sequence_records_defaults(capsys):
    code, report = run_json(capsys, "sequence", "--config", str(CONFIGS / "gevrey1.json"), "--P", "256")
    assert code == 0
    config = report["config"]
    assert config["P"] == 256
    assert config["format"] == "json"
    assert "watson_tol" in config["tolerances"]
    assert "output" not in config


def test_sequence_refuses_series_route_without_log_convexity(tmp_path, capsys):
    path = write_config(tmp_path, {"sequence": {"family": "custom", "logM": [0, 1, 1.5]}})
    code, report = run_json(capsys, "sequence", "--config", path)
    assert code == 3
    log_convexity = report["result"]["axioms"]["log_convexity"]
    assert log_convexity["holds"] is False
    assert log_convexity["witness_index"] == 1
    assert report["result"]["series_route"]["available"] is False
    assert "series_route" in [e["path"] for e in report["errors"]]


def test_sequence_too_short_for_checks_is_config_error(tmp_path, capsys):
    path = write_config(tmp_path, {"sequence": {"family": "custom", "logM": [0, 1]}})
    code, out, err = run(capsys, "sequence", "--config", path)
    assert code == 2
    assert out == ""
    payload = error_payload(err)
    assert payload["type"] == "ConfigError"
    assert payload["details"]["field"] == "P"


def test_sequence_missing_alpha_is_config_error(tmp_path, capsys):
    path = write_config(tmp_path, {"sequence": {"family": "gevrey"}})
    code, out, err = run(capsys, "sequence", "--config", path)
    assert code == 2
    assert out == ""
    payload = error_payload(err)
    assert payload["type"] == "ConfigError"
    assert "alpha" in payload["details"]["field"]


def test_unknown_config_keys_are_rejected(tmp_path, capsys):
    path = write_config(tmp_path, {"sequence": {"family": "gevrey", "alpha": 1}, "colour": "red"})
    code, _, err = run(capsys, "sequence", "--config", path)
    assert code == 2
    assert error_payload(err)["details"]["field"] == "colour"


def test_missing_config_file(tmp_path, capsys):
    code, _, err = run(capsys, "sequence", "--config", str(tmp_path / "absent.json"))
    assert code == 2
    assert error_payload(err)["details"]["field"] == "config"


# -- verdict ---------------------------------------------------------------------------------


def test_verdict_on_gevrey_polysector(capsys):
    code, report = run_json(
        capsys, "verdict", "--config", str(CONFIGS / "gevrey1.json"), "--gamma", "0.5,1.0", "--P", "1024"
    )
    assert code == 0
    result = report["result"]
    assert result["gamma_bar"] == 1.0
    assert result["gamma_under"] == 0.5
    assert result["s_qa"]["kind"] == "qa"
    assert result["qa"]["kind"] == "not_qa"
    assert result["s_qa"]["mode"] == "s_qa"
    assert result["growth_index_divergence"]["holds"] is True


def test_verdict_open_watson_case(capsys):
    code, report = run_json(capsys, "verdict", "--config", str(CONFIGS / "watson_open.json"))
    assert code == 0
    for key in ("watson_s_qa", "watson_qa"):
        verdict = report["result"][key]
        assert verdict["kind"] == "inconclusive"
        assert verdict["note"] == OPEN_PROBLEM_NOTE
    assert report["result"]["growth_index_divergence"]["holds"] is False


def test_verdict_rejects_negative_opening(capsys):
    code, out, err = run(capsys, "verdict", "--config", str(CONFIGS / "gevrey1.json"), "--gamma=-1")
    assert code == 2
    assert out == ""
    assert error_payload(err)["details"]["field"].startswith("gamma")


def test_verdict_rejects_malformed_opening_list(capsys):
    code, _, err = run(capsys, "verdict", "--config", str(CONFIGS / "gevrey1.json"), "--gamma", "1,x")
    assert code == 2
    assert error_payload(err)["details"]["field"] == "gamma"


def test_verdict_needs_openings(capsys):
    code, _, err = run(capsys, "verdict", "--config", str(CONFIGS / "gevrey1.json"))
    assert code == 2
    assert error_payload(err)["details"]["field"] == "gamma"


# -- asymp ------------------------------------------------------------------------------------


def test_asymp_exp_sum(capsys):
    code, report = run_json(capsys, "asymp", "--config", str(CONFIGS / "exp_sum.json"))
    assert code == 0
    result = report["result"]
    assert result["n"] == 2
    assert result["grid_size"] == (16 * 3) ** 2
    assert max(row["residual"] for row in result["coherence"]) < 1e-8
    assert len(result["borel"]) == 10
    assert all(entry["value"] == [1.0, 0.0] for entry in result["borel"])
    (row,) = result["remainder"]
    assert row["alpha"] == [3, 3]
    assert row["holds"] is True
    assert len(result["approximants"]) == 8
    assert result["approximant_depth"] == 4
    assert report["errors"] == []


def test_asymp_three_variables_builds_deep_enough_family(tmp_path, capsys):
    path = write_config(tmp_path, {
        "command": "asymp",
        "fixture": "exp_sum",
        "n": 3,
        "D": 2,
        "grid_radii": 3,
        "grid_args": 3,
    })
    code, report = run_json(capsys, "asymp", "--config", path)
    assert code == 0
    assert report["errors"] == []
    result = report["result"]
    assert result["approximant_depth"] == 3
    assert len(result["borel"]) == 10
    assert len(result["approximants"]) == 8
    (row,) = result["remainder"]
    assert row["alpha"] == [2, 2, 2]
    assert row["holds"] is True


def test_asymp_polynomial_remainder_vanishes(capsys):
    code, report = run_json(capsys, "asymp", "--fixture", "poly:0,0,1,1", "--n", "1", "--D", "4")
    assert code == 0
    result = report["result"]
    assert [entry["value"] for entry in result["borel"]] == [[0.0, 0.0], [0.0, 0.0], [2.0, 0.0], [6.0, 0.0], [0.0, 0.0]]
    (row,) = result["remainder"]
    assert row["alpha"] == [4]
    assert row["P_hat"] <= 1e-12


def test_asymp_flat_profile(tmp_path, capsys):
    path = write_config(tmp_path, {
        "command": "asymp",
        "fixture": "gevrey_flat:1",
        "n": 1,
        "D": 5,
        "orders": [1, 2, 3, 4, 5],
        "grid_radii": 64,
        "grid_args": 1,
    })
    code, report = run_json(capsys, "asymp", "--config", path)
    assert code == 0
    result = report["result"]
    assert result["openings"] == [0.5]
    assert all(entry["value"] == [0.0, 0.0] for entry in result["borel"])
    for p, row in zip(range(1, 6), result["remainder"]):
        expected = (p / math.e) ** p
        assert expected * 0.99 <= row["P_hat"] <= expected * (1 + 1e-9)
        assert row["holds"] is True


def test_asymp_unknown_fixture(capsys):
    code, _, err = run(capsys, "asymp", "--fixture", "bessel", "--n", "1", "--D", "2")
    assert code == 2
    payload = error_payload(err)
    assert payload["details"]["field"] == "fixture"
    assert "exp_sum" in payload["details"]["available"]


def test_asymp_needs_fixture(capsys):
    code, _, err = run(capsys, "asymp", "--D", "2")
    assert code == 2
    assert error_payload(err)["details"]["field"] == "fixture"


# -- report and output -------------------------------------------------------------------------------


def test_report_combines_sections(capsys):
    code, report = run_json(
        capsys, "report", "--config", str(CONFIGS / "gevrey1.json"),
        "--P", "256", "--gamma", "1.5", "--fixture", "exp_sum", "--D", "2",
    )
    assert code == 0
    assert set(report["result"]) == {"sequence", "verdict", "asymp"}
    assert report["result"]["asymp"]["n"] == 1
    assert report["result"]["verdict"]["qa"]["kind"] == "qa"


def test_report_without_gamma_or_fixture(capsys):
    code, report = run_json(capsys, "report", "--config", str(CONFIGS / "gevrey1.json"), "--P", "256")
    assert code == 0
    assert set(report["result"]) == {"sequence"}


def test_reports_are_byte_identical(tmp_path, capsys):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        code, stdout, _ = run(capsys, "sequence", "--config", str(CONFIGS / "gevrey1.json"), "--P", "256", "--out", str(out))
        assert code == 0
        assert stdout == ""
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text())["command"] == "sequence"


def _lookup(obj, path):
    for part in path.split("."):
        obj = obj[int(part)] if isinstance(obj, list) else obj[part]
    return obj


def test_csv_matches_json(capsys):
    argv = ("sequence", "--config", str(CONFIGS / "gevrey1.json"), "--P", "256")
    _, report = run_json(capsys, *argv)
    code, out, _ = run(capsys, *argv, "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["path", "value"]
    numeric = 0
    for path, cell in rows[1:]:
        value = _lookup(report, path)
        if isinstance(value, bool) or value is None or isinstance(value, str):
            continue
        if isinstance(value, list):
            assert value == [] and cell == "[]"
            continue
        numeric += 1
        if isinstance(value, float) and math.isnan(value):
            assert cell == "NaN"
        else:
            assert float(cell) == value
    assert numeric > 20


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
