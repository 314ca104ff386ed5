import json

import numpy as np
import pytest

from lplr.cli import main
from lplr.matio import load_matrix, store_matrix
from lplr.report import report_from_json, reports_equal_modulo_time


@pytest.fixture
def synth_file(tmp_path):
    path = tmp_path / "a.lplr"
    code = main(
        [
            "synth", "--n", "200", "--d", "16", "--k-true", "4",
            "--outliers", "0.05", "--seed", "7", "--out", str(path),
        ]
    )
    assert code == 0
    return path


def test_synth_creates_matrix(synth_file):
    a = load_matrix(synth_file)
    assert a.shape == (200, 16)


def test_factorize_report_respects_bound(tmp_path, synth_file):
    rep_path = tmp_path / "rep.json"
    code = main(
        [
            "factorize", "--input", str(synth_file), "--p", "1", "--rank", "8",
            "--method", "lowner",
            "--out-left", str(tmp_path / "l.lplr"), "--out-right", str(tmp_path / "r.lplr"),
            "--report", str(rep_path),
        ]
    )
    assert code == 0
    rep = json.loads(rep_path.read_text())
    assert rep["error_pp"] <= rep["bound_upper"] * 1.1 ** rep["p"]
    left = load_matrix(tmp_path / "l.lplr")
    right = load_matrix(tmp_path / "r.lplr")
    assert left.shape == (200, 8) and right.shape == (8, 16)
    recon = left @ right
    a = load_matrix(synth_file)
    assert np.sum(np.abs(a - recon)) == pytest.approx(rep["error_pp"], rel=1e-9)


def test_rank_zero_is_usage_error(synth_file, capsys):
    code = main(["factorize", "--input", str(synth_file), "--rank", "0", "--p", "1"])
    assert code == 1
    assert "usage error" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(synth_file):
    assert main(["factorize", "--input", str(synth_file), "--bogus", "1"]) == 1


def test_numerical_failure_exit_code(tmp_path):
    path = tmp_path / "flat.lplr"
    main(["synth", "--n", "40", "--d", "6", "--k-true", "2", "--noise", "0", "--seed", "1", "--out", str(path)])
    code = main(["factorize", "--input", str(path), "--p", "1", "--rank", "3"])
    assert code == 2


def test_baseline_matches_sigma_tail(tmp_path, synth_file):
    rep_path = tmp_path / "rep.json"
    assert main(["baseline", "--input", str(synth_file), "--rank", "4", "--report", str(rep_path)]) == 0
    rep = json.loads(rep_path.read_text())
    a = load_matrix(synth_file)
    s = np.linalg.svd(a, compute_uv=False)
    assert rep["error_pp"] == pytest.approx(float(np.sum(s[4:] ** 2)), rel=1e-8)
    assert rep["method"] == "svd"


def test_sweep_merges_sorted_reports(tmp_path):
    path = tmp_path / "a.lplr"
    main(["synth", "--n", "60", "--d", "6", "--k-true", "2", "--outliers", "0.05", "--seed", "3", "--out", str(path)])
    rep_path = tmp_path / "sweep.json"
    csv_path = tmp_path / "sweep.csv"
    code = main(
        [
            "sweep", "--input", str(path), "--ks", "2,4", "--ps", "1,2",
            "--methods", "lowner,svd", "--report", str(rep_path), "--csv", str(csv_path),
        ]
    )
    assert code == 0
    reports = json.loads(rep_path.read_text())
    assert len(reports) == 8
    keys = [(r["k"], r["p"], r["method"]) for r in reports]
    assert keys == sorted(keys)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0].startswith("k,p,method") and len(lines) == 9


def test_sweep_parallel_matches_serial(tmp_path):
    path = tmp_path / "a.lplr"
    main(["synth", "--n", "50", "--d", "5", "--k-true", "2", "--outliers", "0.1", "--seed", "9", "--out", str(path)])
    out1, out2 = tmp_path / "s1.json", tmp_path / "s2.json"
    args = ["sweep", "--input", str(path), "--ks", "2,3", "--ps", "1", "--methods", "lowner,svd"]
    assert main(args + ["--report", str(out1), "--workers", "1"]) == 0
    assert main(args + ["--report", str(out2), "--workers", "3"]) == 0
    r1 = json.loads(out1.read_text())
    r2 = json.loads(out2.read_text())
    for a, b in zip(r1, r2):
        a.pop("wall_time_ms"), b.pop("wall_time_ms")
    assert r1 == r2


def test_check_passes_on_healthy_input(tmp_path, capsys):
    path = tmp_path / "a.lplr"
    main(["synth", "--n", "50", "--d", "5", "--k-true", "2", "--noise", "0.2", "--seed", "2", "--out", str(path)])
    assert main(["check", "--input", str(path), "--p", "1"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3 and "FAIL" not in out


def test_cli_determinism_modulo_wall_time(tmp_path, synth_file):
    reps = []
    for name in ("r1.json", "r2.json"):
        rep_path = tmp_path / name
        assert main(
            [
                "factorize", "--input", str(synth_file), "--p", "1.5", "--rank", "6",
                "--method", "randomized", "--seed", "123", "--report", str(rep_path),
            ]
        ) == 0
        reps.append(report_from_json(rep_path.read_text()))
    assert reports_equal_modulo_time(reps[0], reps[1])


def test_missing_subcommand_is_usage_error():
    assert main([]) == 1
