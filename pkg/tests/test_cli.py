import json

import pytest

from landau_blowdown import cli


def run_cli(*args):
    return cli.main([str(a) for a in args])


def test_simulate_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "sim"
    code = run_cli("simulate", "--t-end", 1.0, "--grid-n", 512, "--dt", 1e-3, "--output", out)
    assert code == 0
    rows = [ln for ln in (out / "diagnostics.csv").read_text().splitlines() if not ln.startswith("#")]
    assert len(rows) - 1 == round(1.0 / 0.05) + 1
    assert "H-theorem: PASS" in capsys.readouterr().out
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["summary"]["mass_drift"] < 1e-10
    text = (out / "diagnostics.csv").read_text()
    assert text.startswith(f"# spec_sha256={meta['spec_sha256']}")
    import csv

    recs = list(csv.DictReader(rows))
    half = next(r for r in recs if abs(float(r["time"]) - 0.5) < 1e-9)
    one = next(r for r in recs if abs(float(r["time"]) - 1.0) < 1e-9)
    assert float(one["dist_to_Meq"]) < float(half["dist_to_Meq"])


def test_simulate_is_deterministic(tmp_path):
    args = ("simulate", "--t-end", 0.1, "--grid-n", 256, "--dt", 1e-3, "--snapshot-every", 0.05)
    run_cli(*args, "--output", tmp_path / "a")
    run_cli(*args, "--output", tmp_path / "b")
    for name in ("diagnostics.csv", "snapshots.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_validation_errors(tmp_path):
    assert run_cli("simulate", "--alpha", 0.7, "--output", tmp_path) == 1
    assert run_cli("sweep", "--deltas", "0.1", "--output", tmp_path) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli("simulate", "--config", bad, "--output", tmp_path) == 1
    assert run_cli("simulate", "--delta", 0.001, "--grid-n", 64, "--output", tmp_path) == 1


def test_solver_failure_exit_code(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"solver": {"scheme": "explicit", "dt": 5e-3, "n": 256, "t_end": 0.01,
                                          "snapshot_every": 0.005}}))
    assert run_cli("simulate", "--config", cfg, "--output", tmp_path / "o") == 2
    assert (tmp_path / "o" / "diagnostics.csv").exists()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"solver": {"delta": 0.2, "n": 256, "dt": 1e-3}, "seed": 5}))
    args = cli.build_parser().parse_args(["simulate", "--config", str(cfg), "--delta", "0.1"])
    spec = cli.spec_from_args(args)
    assert spec.solver.delta == 0.1 and spec.solver.n == 256 and spec.seed == 5


def test_verify_lemmas_empty_and_subset(tmp_path):
    assert run_cli("verify-lemmas", "--checks", "", "--output", tmp_path / "e") == 0
    assert json.loads((tmp_path / "e" / "lemma_reports.json").read_text()) == []
    assert run_cli("verify-lemmas", "--checks", "mu_calculus,trace_identity", "--output", tmp_path / "s") == 0


def test_verify_lemmas_fault(tmp_path, capsys):
    from landau_blowdown.collision_kernel import inject_lambda1_fault

    with inject_lambda1_fault(1.1):
        code = run_cli("verify-lemmas", "--checks", "identities,trace_identity", "--output", tmp_path)
    assert code == 3
    assert "trace_identity" in capsys.readouterr().err


def test_profile_tables(tmp_path):
    assert run_cli("profile-tables", "--delta", 0.04, "--output", tmp_path) == 0
    import csv

    lines = [ln for ln in (tmp_path / "lp_table.csv").read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    assert max(float(r["rel_error"]) for r in rows) < 1e-4
    p1 = [float(r["closed_form"]) for r in rows if r["p"] == "1.0"]
    assert all(b > a for a, b in zip(p1, p1[1:]))
    import math

    from landau_blowdown.gaussian_profiles import GaussianParams, gaussian_lp_norm

    p2 = next(float(r["closed_form"]) for r in rows if r["p"] == "2.0" and float(r["t"]) == 0.0)
    assert abs(p2 - 0.04**0.4 * (4 * math.pi * 0.04) ** -0.75) < 1e-10
    assert abs(p2 - gaussian_lp_norm(GaussianParams(0.04**0.4, 0.04), 2)) < 1e-10


def test_sweep_parallel_matches_sequential(tmp_path):
    base = ("sweep", "--deltas", "0.2,0.15,0.1", "--grid-n", 256, "--dt", 5e-3, "--t-end", 0.5)
    run_cli(*base, "--output", tmp_path / "seq")
    run_cli(*base, "--workers", 2, "--output", tmp_path / "par")
    seq = json.loads((tmp_path / "seq" / "sweep.json").read_text())
    par = json.loads((tmp_path / "par" / "sweep.json").read_text())
    assert seq["dist_to_M"] == par["dist_to_M"] and seq["slope"] == par["slope"]
    assert (tmp_path / "seq" / "sweep.csv").read_bytes() == (tmp_path / "par" / "sweep.csv").read_bytes()


def test_sweep_alpha_03(tmp_path):
    code = run_cli("sweep", "--alpha", 0.3, "--grid-n", 1024, "--dt", 2.5e-4, "--t-end", 0.5,
                   "--snapshot-every", 0.25, "--output", tmp_path)
    res = json.loads((tmp_path / "sweep.json").read_text())
    assert all(s["completed"] for s in res["statuses"])
    assert res["slope"] >= 0.0, f"fitted slope {res['slope']:.3f}"
    assert code == 0
