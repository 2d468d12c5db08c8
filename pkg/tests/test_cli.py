import json

import pytest

from unionrec import bounds, cli
from unionrec.montecarlo import CSV_COLUMNS


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# bound
# ---------------------------------------------------------------------------


def test_bound_preset_single_point(capsys):
    code, out, _ = run_cli(capsys, "bound", "--preset", "fig1a", "--M", "40")
    assert code == 0
    doc = json.loads(out)
    expected = bounds.block_bound_random(25, 5, 2, 40, 10.0**1.3, bounds.BoundConfig())
    assert doc["raw"] == pytest.approx(expected.raw, rel=1e-12)
    assert doc["clamped"] == pytest.approx(expected.clamped, rel=1e-12)
    assert doc["L"] == 25 and doc["k0"] == 5 and doc["d"] == 2
    assert doc["eta0"] == 0.25


def test_bound_grid_csv(capsys, tmp_path):
    out_file = tmp_path / "grid.csv"
    code, _, _ = run_cli(
        capsys, "bound", "--L", "10", "--d", "2", "--k0", "3",
        "--bsnr-db", "13", "--M-grid", "8:20:4", "--wainwright", "--out", str(out_file),
    )
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "# schema=unionrec.bound.v1"
    assert lines[1].startswith("# config=")
    assert lines[2] == "m,bound_raw,bound_clamped,wainwright_raw,wainwright_clamped"
    assert len(lines) == 3 + 4  # M in {8, 12, 16, 20}


def test_bound_csnr_flag_converts_to_block_snr(capsys):
    code, out, _ = run_cli(
        capsys, "bound", "--L", "25", "--d", "2", "--k0", "5", "--csnr-db", "10", "--M", "30"
    )
    assert code == 0
    doc = json.loads(out)
    expected = bounds.block_bound_random(
        25, 5, 2, 30, 2.0 * 10.0, bounds.BoundConfig()
    )
    assert doc["raw"] == pytest.approx(expected.raw, rel=1e-9)


def test_bound_missing_model_field(capsys):
    code, _, err = run_cli(capsys, "bound", "--L", "10", "--d", "2", "--M", "12", "--bsnr-db", "10")
    assert code == 1
    assert "k0" in err


def test_bound_runtime_error_exit_code(capsys):
    # M <= k is a numerical domain error, not a config error
    code, _, err = run_cli(
        capsys, "bound", "--L", "10", "--d", "2", "--k0", "3", "--bsnr-db", "13", "--M", "6"
    )
    assert code == 2
    assert "runtime" in err


def test_bound_pairwise_kind(capsys):
    code, out, _ = run_cli(capsys, "bound", "--kind", "pairwise", "--l", "2", "--lam", "50")
    assert code == 0
    doc = json.loads(out)
    expected = bounds.pairwise_error_bound(2, 50.0, bounds.BoundConfig())
    assert doc["raw"] == pytest.approx(expected.raw, rel=1e-12)


def test_bound_grouped_and_chernoff_kinds(capsys, tmp_path):
    prof = tmp_path / "p.json"
    prof.write_text(json.dumps({"1": [0.5, 12], "2": [1.1, 30]}))
    code, out, _ = run_cli(
        capsys, "bound", "--kind", "grouped", "--profile", str(prof), "--M", "20", "--k", "4"
    )
    assert code == 0
    grouped = json.loads(out)
    expected = bounds.grouped_bound({1: 0.5, 2: 1.1}, {1: 12, 2: 30}, 20, 4, bounds.BoundConfig())
    assert grouped["raw"] == pytest.approx(expected.raw, rel=1e-12)
    code, out, _ = run_cli(
        capsys, "bound", "--kind", "chernoff", "--profile", str(prof), "--M", "20", "--k", "4"
    )
    assert code == 0
    chern = json.loads(out)
    assert chern["raw"] >= grouped["raw"]
    assert chern["asymptotics_valid"] is True


def test_bound_union_avg_kind(capsys, tmp_path):
    inst = tmp_path / "inst.json"
    inst.write_text(
        json.dumps(
            {
                "L": 6, "d": 2, "k0": 2, "M": 10,
                "operator": {"kind": "gaussian", "seed": 3},
                "sigma_w2": 1.0,
                "signal": {"bsnr_min_db": 10.0, "bsnr_ratio": 1.5, "seed": 5},
            }
        )
    )
    code, out, _ = run_cli(capsys, "bound", "--kind", "union-avg", "--instance", str(inst))
    assert code == 0
    doc = json.loads(out)
    assert doc["raw"] <= doc["grouped_raw"]  # grouping relaxes the average
    assert set(doc["profile"]) == {"1", "2"}


def test_bound_kind_missing_inputs(capsys):
    code, _, err = run_cli(capsys, "bound", "--kind", "pairwise", "--l", "2")
    assert code == 1 and "lam" in err
    code, _, err = run_cli(capsys, "bound", "--kind", "grouped", "--M", "20", "--k", "4")
    assert code == 1 and "profile" in err


# ---------------------------------------------------------------------------
# complexity
# ---------------------------------------------------------------------------


def test_complexity_general(capsys, tmp_path):
    prof = tmp_path / "p.json"
    prof.write_text(json.dumps({"1": [0.5, 12], "2": [1.1, 30]}))
    code, out, _ = run_cli(
        capsys, "complexity", "--kind", "general", "--profile", str(prof), "--k", "4"
    )
    assert code == 0
    doc = json.loads(out)
    rep = bounds.general_complexity({1: 0.5, 2: 1.1}, {1: 12, 2: 30}, 4, bounds.BoundConfig())
    assert doc["m_required"] == rep.m_required
    assert doc["dominating_l"] == rep.dominating_l


def test_complexity_block(capsys):
    code, out, _ = run_cli(
        capsys, "complexity", "--L", "25", "--d", "2", "--k0", "5", "--bsnr-db", "13"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["m_required"] == 22


def test_complexity_wainwright(capsys):
    code, out, _ = run_cli(
        capsys, "complexity", "--kind", "wainwright", "--N", "50", "--k", "5",
        "--csnr-db", "10", "--eta1", "0",
    )
    assert code == 0
    assert json.loads(out)["m_required"] == 28710


def test_complexity_rip(capsys):
    code, out, _ = run_cli(
        capsys, "complexity", "--kind", "rip", "--L", "25", "--d", "2", "--k0", "5",
        "--delta", "0.5", "--t", "1.0",
    )
    assert code == 0
    assert json.loads(out)["m_required"] == 457


# ---------------------------------------------------------------------------
# simulate / sweep
# ---------------------------------------------------------------------------


def test_simulate_single_point(capsys):
    code, out, _ = run_cli(
        capsys, "simulate", "--L", "5", "--d", "1", "--k0", "2", "--M", "6",
        "--bsnr-db", "12", "--trials", "50", "--matrix-redraws", "5", "--seed", "9",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["point"]["trials"] == 50
    assert doc["config"]["master_seed"] == 9
    assert 0.0 <= doc["point"]["error_rate"]["ml"] <= 1.0


def test_sweep_from_config_file(capsys, tmp_path):
    config = dict(
        L=5, d=1, k0=2, sweep_axis="m", sweep_values=[4, 6], trials=40,
        master_seed=3, bsnr_min_db=10.0, matrix_redraws=4, decoders=["ml"],
    )
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(config))
    code, out, _ = run_cli(
        capsys, "sweep", "--config", str(cfg_path), "--out-dir", str(tmp_path)
    )
    assert code == 0
    csv_text = (tmp_path / "exp.csv").read_text()
    lines = csv_text.splitlines()
    assert lines[0] == "# schema=unionrec.sweep.v1"
    assert lines[1] == "# master_seed=3"
    assert lines[3] == ",".join(CSV_COLUMNS)
    sidecar = json.loads((tmp_path / "exp.sidecar.json").read_text())
    assert sidecar["config"]["L"] == 5
    assert "seed_lineage" in sidecar


def test_sweep_missing_config_field(capsys, tmp_path):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"L": 5, "d": 1, "sweep_axis": "m",
                                    "sweep_values": [4], "trials": 10, "master_seed": 0}))
    code, _, err = run_cli(capsys, "sweep", "--config", str(cfg_path), "--out-dir", str(tmp_path))
    assert code == 1
    assert "k0" in err


def test_sweep_headers_stable_across_runs(capsys, tmp_path):
    config = dict(
        L=5, d=1, k0=2, sweep_axis="m", sweep_values=[4], trials=20,
        master_seed=5, bsnr_min_db=10.0, matrix_redraws=2, decoders=["ml", "bomp"],
    )
    for name in ("a", "b"):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(config))
        code, _, _ = run_cli(capsys, "sweep", "--config", str(p), "--out-dir", str(tmp_path))
        assert code == 0
    a = (tmp_path / "a.csv").read_text().splitlines()
    b = (tmp_path / "b.csv").read_text().splitlines()
    assert a[3] == b[3] == ",".join(CSV_COLUMNS)
    assert a[4:] == b[4:]  # identical data for identical config


def test_seed_env_override(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("UNIONREC_SEED", "4242")
    code, out, _ = run_cli(
        capsys, "simulate", "--L", "5", "--d", "1", "--k0", "2", "--M", "6",
        "--bsnr-db", "12", "--trials", "10", "--matrix-redraws", "2", "--seed", "9",
    )
    assert code == 0
    assert json.loads(out)["config"]["master_seed"] == 4242


# ---------------------------------------------------------------------------
# validate-pairwise
# ---------------------------------------------------------------------------


def test_validate_pairwise_outputs_record(capsys):
    code, out, _ = run_cli(
        capsys, "validate-pairwise", "--L", "6", "--d", "1", "--k0", "3",
        "--M", "10", "--lam", "30", "--draws", "20000", "--seed", "1",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["lam"] == pytest.approx(30.0, rel=1e-9)
    assert doc["p_delta"] <= doc["pair_bound_clamped"] + 0.01
    assert doc["n_draws"] == 20000


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def test_selftest_passes(capsys):
    code, out, _ = run_cli(capsys, "selftest")
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert len(lines) >= 6  # at least one check per module
    assert all(l.startswith("PASS") for l in lines)


def test_selftest_reports_corrupted_eta0(capsys, monkeypatch):
    monkeypatch.setenv("UNIONREC_ETA0", "0.6")
    code, out, _ = run_cli(capsys, "selftest")
    assert code == 1
    assert "FAIL: bounds.config_constants" in out
