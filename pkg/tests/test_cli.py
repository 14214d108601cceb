"""End-to-end checks of the command-line entry point, run in-process."""

import csv
import io
import json
import os

import pytest

from chowlalab import correlation_sum, CorrelationSpec, load_sieve_cache
from chowlalab.cli import ENV_CACHE, main


@pytest.fixture(autouse=True)
def no_ambient_cache(monkeypatch):
    monkeypatch.delenv(ENV_CACHE, raising=False)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, f"exit {code}, stderr: {err}"
    return json.loads(out)


# ----------------------------------------------------------------------
# report shape and provenance


def test_moments_json_payload(capsys):
    blob = run_json(capsys, "moments", "--degrees", "1", "--height", "2",
                    "--x", "10", "--k-max", "3")
    assert blob["artifact"]["name"] == "chowla-lab"
    assert blob["config"]["subcommand"] == "moments"
    assert blob["config"]["height"] == 2
    assert blob["count"] == 20
    assert [row["k"] for row in blob["rows"]] == [1, 2, 3]
    assert blob["rows"][1]["predicted"] == pytest.approx(16 / 20)


def test_moments_csv_payload(capsys):
    code, out, err = run_cli(capsys, "moments", "--degrees", "1", "--height",
                             "1", "--x", "3", "--k-max", "2",
                             "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2
    assert list(rows[0].keys()) == ["spec", "interval", "k", "raw_sum",
                                    "empirical", "predicted", "ratio",
                                    "stderr", "count", "elapsed_ms"]
    assert rows[0]["raw_sum"] == "-4"  # sum of C over the six hand-case lines


def test_output_flag_writes_file(tmp_path, capsys):
    dest = tmp_path / "report.json"
    code, out, err = run_cli(capsys, "moments", "--degrees", "1", "--height",
                             "1", "--x", "3", "--output", str(dest))
    assert code == 0
    assert out == ""
    blob = json.loads(dest.read_text(encoding="utf-8"))
    assert blob["count"] == 6


def test_runs_are_reproducible_apart_from_timing(capsys):
    argv = ("moments", "--degrees", "2", "--height", "2", "--x", "8",
            "--k-max", "4")
    a = run_json(capsys, *argv)
    b = run_json(capsys, *argv)
    a.pop("elapsed_ms")
    b.pop("elapsed_ms")
    assert a == b


# ----------------------------------------------------------------------
# config files


def test_config_file_supplies_defaults_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"subcommand": "moments", "degrees": "1",
                               "height": 2, "x": 10, "k_max": 2}),
                   encoding="utf-8")
    blob = run_json(capsys, "moments", "--config", str(cfg), "--height", "1")
    assert blob["config"]["height"] == 1  # explicit flag beats the file
    assert blob["config"]["x"] == 10
    assert blob["count"] == 6
    assert len(blob["rows"]) == 2


def test_config_echo_reproduces_the_run(tmp_path, capsys):
    first = run_json(capsys, "moments", "--degrees", "1", "--height", "2",
                     "--x", "10")
    cfg = tmp_path / "echo.json"
    cfg.write_text(json.dumps(first["config"]), encoding="utf-8")
    second = run_json(capsys, "moments", "--config", str(cfg))
    first.pop("elapsed_ms")
    second.pop("elapsed_ms")
    assert first == second


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"subcommand": "moments", "degrees": "1",
                               "height": 1, "x": 3, "hight": 2}),
                   encoding="utf-8")
    code, out, err = run_cli(capsys, "moments", "--config", str(cfg))
    assert code == 2
    assert "hight" in err


def test_config_file_rejects_subcommand_mismatch(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"subcommand": "probe", "x": 3}),
                   encoding="utf-8")
    code, out, err = run_cli(capsys, "moments", "--config", str(cfg))
    assert code == 2
    assert "probe" in err


# ----------------------------------------------------------------------
# sieve caches


def test_sieve_subcommand_writes_cache(tmp_path, capsys):
    dest = tmp_path / "spf.bin"
    blob = run_json(capsys, "sieve", "--limit", "20000", "--out", str(dest))
    assert blob["limit"] == 20000
    assert blob["bytes"] == 16 + 4 * (20000 - 1)
    assert os.path.getsize(dest) == blob["bytes"]
    assert load_sieve_cache(str(dest)).limit == 20000


def test_sieve_uses_env_cache_path(tmp_path, capsys, monkeypatch):
    dest = tmp_path / "env.bin"
    monkeypatch.setenv(ENV_CACHE, str(dest))
    blob = run_json(capsys, "sieve", "--limit", "5000")
    assert blob["path"] == str(dest)
    assert dest.exists()


def test_sieve_requires_some_output_path(capsys):
    code, out, err = run_cli(capsys, "sieve", "--limit", "5000")
    assert code == 2
    assert ENV_CACHE in err


def test_small_cache_triggers_rebuild_note(tmp_path, capsys):
    dest = tmp_path / "tiny.bin"
    run_json(capsys, "sieve", "--limit", "100", "--out", str(dest))
    code, out, err = run_cli(capsys, "moments", "--degrees", "1", "--height",
                             "2", "--x", "100", "--sieve-cache", str(dest))
    assert code == 0
    assert "rebuilding" in err


def test_adequate_cache_is_loaded_silently(tmp_path, capsys):
    dest = tmp_path / "big.bin"
    run_json(capsys, "sieve", "--limit", "50000", "--out", str(dest))
    code, out, err = run_cli(capsys, "moments", "--degrees", "1", "--height",
                             "2", "--x", "100", "--sieve-cache", str(dest))
    assert code == 0
    assert err == ""


# ----------------------------------------------------------------------
# identity verification and exit codes


def test_verify_identity_passes_and_matches_direct_sum(capsys, sieve_1m):
    blob = run_json(capsys, "verify-identity", "--d", "1", "--points", "1,2",
                    "--height", "2")
    assert blob["pass"] is True
    spec = CorrelationSpec(d=1, m=(1, 2), H=2)
    assert blob["lhs"] == correlation_sum(spec, sieve_1m)
    assert blob["abs_err"] <= 1e-6


def test_verify_identity_l_flag_consistency(capsys):
    code, out, err = run_cli(capsys, "verify-identity", "--d", "1",
                             "--points", "1,2", "--height", "2", "--L", "3")
    assert code == 2
    assert "does not match" in err


def test_zero_tolerance_fails_with_exit_1(capsys):
    code, out, err = run_cli(capsys, "verify-identity", "--d", "2",
                             "--points", "2,3", "--height", "2", "--tol", "0")
    assert code == 1
    blob = json.loads(out)
    assert blob["pass"] is False
    assert 0 < blob["abs_err"] <= 1e-9 * 5**3


def test_node_budget_refusal_and_force(capsys):
    argv = ("verify-identity", "--d", "1", "--points", "2", "--height", "2",
            "--node-budget", "10")
    code, out, err = run_cli(capsys, *argv)
    assert code == 2
    assert "budget" in err
    code, out, err = run_cli(capsys, *argv, "--force")
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_missing_required_option(capsys):
    code, out, err = run_cli(capsys, "moments", "--height", "2", "--x", "10")
    assert code == 2
    assert "--degrees" in err


def test_no_subcommand_prints_help(capsys):
    code, out, err = run_cli(capsys)
    assert code == 2
    assert "chowla-lab" in err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


# ----------------------------------------------------------------------
# the remaining subcommands


def test_davenport_payload(capsys):
    blob = run_json(capsys, "davenport", "--x", "100")
    assert blob["grid_points"] == 800
    assert blob["summatory_abs"] == 2  # |sum of lambda up to 100|
    assert blob["value"] > 0
    assert 0 <= blob["alpha_star"] < 6.3
    assert blob["normalized_value"] == pytest.approx(
        blob["value"] * (4.605170185988092) ** 2 / 100)


def test_exceedance_multi_threshold(capsys):
    blob = run_json(capsys, "exceedance", "--degree", "1", "--height", "2",
                    "--x", "10", "--y", "0.5,1.0")
    assert [r["y"] for r in blob["runs"]] == [0.5, 1.0]
    assert all(r["certified"] for r in blob["runs"])
    assert blob["runs"][1]["count"] == 0


def test_probe_certified(capsys):
    blob = run_json(capsys, "probe", "--degree", "3", "--height", "1",
                    "--x", "10", "--y", "0.5", "--m", "1")
    assert blob["certified"] is True
    assert blob["threshold_value"] == pytest.approx((1 / 8) ** (1 / 8))
    assert blob["proportion"] >= blob["probe"]


def test_weight_file_violation_exits_2(tmp_path, capsys):
    bad = tmp_path / "w.txt"
    bad.write_text("11,0.5,0\n13,1.5,0\n", encoding="utf-8")
    code, out, err = run_cli(capsys, "moments", "--degrees", "1", "--height",
                             "1", "--x", "10", "--weights", f"file:{bad}")
    assert code == 2
    assert "b_13" in err


def test_unknown_weights_string(capsys):
    code, out, err = run_cli(capsys, "moments", "--degrees", "1", "--height",
                             "1", "--x", "10", "--weights", "squares")
    assert code == 2
    assert "squares" in err
