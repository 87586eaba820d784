import json
import math
import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from tomoslice import cli
from tomoslice.bodies import Ellipsoid, Polytope, QuadricDomain, save_body


@pytest.fixture()
def body_dir(tmp_path):
    save_body(Ellipsoid.from_axes([1.0, 1.0, 1.0]), tmp_path / "ball.json")
    save_body(
        Ellipsoid.from_axes([1.4, 0.9, 1.1], center=[0.2, -0.1, 0.3]),
        tmp_path / "ell.json",
    )
    save_body(Polytope.cube(3), tmp_path / "cube.json")
    save_body(QuadricDomain("paraboloid", np.array([1.0, 1.0])), tmp_path / "par.json")
    save_body(
        QuadricDomain("hyperboloid-sheet", np.array([1.0, 1.0]), 1.0),
        tmp_path / "hyp.json",
    )
    return tmp_path


def run_cli(args):
    return cli.main([str(a) for a in args])


def test_profile_json_report(body_dir):
    out = body_dir / "prof.json"
    code = run_cli(["profile", "--body", body_dir / "ball.json", "--xi", "0,0,1",
                    "--grid", "16", "--out", out])
    assert code == 0
    rep = json.loads(out.read_text())
    assert set(rep) == {"config", "profile"}
    assert rep["config"]["command"] == "profile"
    grid = np.array(rep["profile"]["grid"])
    vals = np.array(rep["profile"]["values"])
    assert np.allclose(vals, np.pi * (1 - grid**2) * (np.abs(grid) <= 1), atol=1e-12)


def test_profile_csv_report(body_dir):
    out = body_dir / "prof.csv"
    code = run_cli(["profile", "--body", body_dir / "ball.json", "--xi", "0,0,1",
                    "--grid", "16", "--format", "csv", "--out", out])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config ")
    json.loads(lines[0][len("# config "):])  # embedded config parses
    assert lines[1] == "t,A"
    assert len(lines) == 18


def test_moments_report(body_dir):
    out = body_dir / "mom.json"
    code = run_cli(["moments", "--body", body_dir / "ell.json", "--xi", "1,0,0",
                    "--directions", "40", "--out", out])
    assert code == 0
    rep = json.loads(out.read_text())
    ks = [r["k"] for r in rep["reports"]]
    assert ks == [0, 1, 2]
    for r in rep["reports"]:
        res = r["relative_residual"]
        if res is not None:
            assert res < 1e-8


def test_algfit_accepts_ellipsoid(body_dir):
    out = body_dir / "alg.json"
    code = run_cli(["algfit", "--body", body_dir / "ell.json", "--xi", "0.3,-0.2,0.9",
                    "--out", out])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["verdict"] == "m=1"
    assert rep["winner"]["m"] == 1
    assert rep["winner"]["effective_degree"] == 2
    assert rep["winner"]["root_report"]["verdict"] == "conforms"


def test_algfit_rejects_cube_with_exit_2(body_dir):
    out = body_dir / "alg.json"
    code = run_cli(["algfit", "--body", body_dir / "cube.json", "--xi", "1,1,1",
                    "--out", out])
    assert code == 2
    rep = json.loads(out.read_text())
    assert rep["verdict"] == "none"
    assert min(row["relative_residual"] for row in rep["sweep"]) > 1e-3


def test_detect_exit_codes(body_dir):
    out = body_dir / "det.json"
    assert run_cli(["detect", "--body", body_dir / "ell.json", "--out", out]) == 0
    rep = json.loads(out.read_text())
    assert rep["report"]["verdict"] == "accept"
    assert run_cli(["detect", "--body", body_dir / "cube.json", "--out", out]) == 2
    rep = json.loads(out.read_text())
    assert rep["report"]["verdict"] == "reject"


def test_asymptote_report(body_dir):
    out = body_dir / "asy.json"
    code = run_cli(["asymptote", "--body", body_dir / "ball.json", "--xi", "0,0,1",
                    "--out", out])
    assert code == 0
    rep = json.loads(out.read_text())["report"]
    assert rep["estimated_exponent"] == pytest.approx(1.0, abs=0.05)
    assert rep["constant_ratio"] == pytest.approx(1.0, abs=0.02)
    assert rep["predicted_constant"] == pytest.approx(2.0 * math.pi, rel=1e-4)


def test_quadric_check_conforms(body_dir):
    out = body_dir / "qc.json"
    for name in ("par.json", "hyp.json"):
        code = run_cli(["quadric-check", "--body", body_dir / name, "--xi", "0,0,1",
                        "--out", out])
        assert code == 0
        rep = json.loads(out.read_text())["report"]
        assert rep["verdict"] == "conforms"
        for row in rep["results"]:
            assert row["relative_residual"] < 1e-8


def test_quadric_check_explicit_window(body_dir):
    out = body_dir / "qc.json"
    code = run_cli(["quadric-check", "--body", body_dir / "par.json", "--xi", "0,0,1",
                    "--window", "1.0,3.0", "--out", out])
    assert code == 0
    rep = json.loads(out.read_text())["report"]
    assert rep["window"] == [1.0, 3.0]


def test_reports_are_byte_identical_across_runs(body_dir):
    pairs = []
    for label, args in (
        ("det", ["detect", "--body", body_dir / "ell.json", "--seed", "11"]),
        ("prof", ["profile", "--body", body_dir / "ball.json", "--xi", "0,0,1",
                  "--grid", "16", "--seed", "11"]),
        ("mom", ["moments", "--body", body_dir / "ell.json", "--xi", "1,0,0",
                 "--directions", "30", "--seed", "11"]),
    ):
        a = body_dir / f"{label}_a.json"
        b = body_dir / f"{label}_b.json"
        assert run_cli(args + ["--out", a]) == run_cli(args + ["--out", b])
        pairs.append((a.read_bytes(), b.read_bytes()))
    for first, second in pairs:
        assert first == second


def test_unknown_body_key_names_offender(body_dir, capsys):
    bad = body_dir / "bad.json"
    bad.write_text(json.dumps({"type": "ellipsoid", "center": [0, 0, 0],
                               "shape": np.eye(3).tolist(), "extra_key": 1}))
    code = run_cli(["profile", "--body", bad, "--xi", "0,0,1"])
    assert code == 1
    err = capsys.readouterr().err
    assert "extra_key" in err


def test_malformed_json_names_file(body_dir, capsys):
    bad = body_dir / "mangled.json"
    bad.write_text("{not json")
    code = run_cli(["profile", "--body", bad, "--xi", "0,0,1"])
    assert code == 1
    assert "mangled.json" in capsys.readouterr().err


def test_missing_body_file_is_error(body_dir, capsys):
    code = run_cli(["profile", "--body", body_dir / "nope.json", "--xi", "0,0,1"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_missing_xi_is_error(body_dir, capsys):
    code = run_cli(["profile", "--body", body_dir / "ball.json"])
    assert code == 1
    assert "--xi" in capsys.readouterr().err


def test_bad_xi_dimension_is_error(body_dir, capsys):
    code = run_cli(["profile", "--body", body_dir / "ball.json", "--xi", "0,1"])
    assert code == 1


def test_threads_env_validation(body_dir, monkeypatch, capsys):
    monkeypatch.setenv("TOMOSLICE_THREADS", "not-a-number")
    code = run_cli(["detect", "--body", body_dir / "ell.json"])
    assert code == 1
    assert "TOMOSLICE_THREADS" in capsys.readouterr().err
    monkeypatch.setenv("TOMOSLICE_THREADS", "0")
    assert run_cli(["detect", "--body", body_dir / "ell.json"]) == 1
    capsys.readouterr()
    monkeypatch.setenv("TOMOSLICE_THREADS", "2")
    out = body_dir / "det.json"
    assert run_cli(["detect", "--body", body_dir / "ell.json", "--out", out]) == 0
    assert json.loads(out.read_text())["config"]["threads"] == 2


def test_installed_entry_point(body_dir):
    exe = shutil.which("tomoslice")
    if exe is None:
        pytest.skip("console script not on PATH")
    out = body_dir / "prof.json"
    proc = subprocess.run(
        [exe, "profile", "--body", str(body_dir / "ball.json"), "--xi", "0,0,1",
         "--grid", "16", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(out.read_text())["config"]["command"] == "profile"
