import json
import subprocess
import sys

import numpy as np
import pytest

from parentasp.cli import load_config, build_parser, main
from parentasp.ingest import builtin_system, load_hamiltonian, load_series, save_hamiltonian
from parentasp.parent import build_covariance, fold


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def ch2_files(tmp_path):
    system = builtin_system("ch2-like")
    save_hamiltonian(system.target, tmp_path / "target.txt")
    save_hamiltonian(system.initial, tmp_path / "fock.txt")
    return tmp_path


def test_parent_outputs(ch2_files, tmp_path):
    out = tmp_path / "out"
    assert run("parent", "--hamiltonian", ch2_files / "target.txt", "--trial", "rhf", "--out", out) == 0
    folded = load_hamiltonian(out / "parent.txt")
    side = json.loads((out / "parent.json").read_text())
    for key in ("alpha", "lambda", "cost_value", "kernel_eigenvalues", "pauli_set"):
        assert key in side
    # the sidecar alpha refolds to the written operator
    from parentasp.pauli import parse_pauli
    from parentasp.trial import basis_state
    cov = build_covariance([parse_pauli(p) for p in side["pauli_set"]], basis_state("1010"))
    again = fold(np.array(side["alpha"]), cov).folded
    np.testing.assert_allclose(folded.to_dense(), again.to_dense(), atol=1e-12)


def test_covariance_then_parent(ch2_files, tmp_path):
    cdir = tmp_path / "cov"
    assert run("covariance", "--hamiltonian", ch2_files / "target.txt", "--trial", "rhf", "--out", cdir) == 0
    pdir = tmp_path / "par"
    assert run("parent", "--hamiltonian", ch2_files / "target.txt", "--covariance", cdir / "covariance.json",
               "--out", pdir) == 0
    direct = tmp_path / "direct"
    run("parent", "--hamiltonian", ch2_files / "target.txt", "--trial", "rhf", "--out", direct)
    assert (pdir / "parent.txt").read_bytes() == (direct / "parent.txt").read_bytes()


def test_estimate_and_evolve(tmp_path):
    system = builtin_system("one-qubit-zx")
    save_hamiltonian(system.initial, tmp_path / "hi.txt")
    save_hamiltonian(system.target, tmp_path / "hf.txt")
    out = tmp_path / "est"
    assert run("estimate", "--initial", tmp_path / "hi.txt", "--hamiltonian", tmp_path / "hf.txt",
               "--grid", 1001, "--out", out) == 0
    est = json.loads((out / "estimate.json").read_text())
    assert est["t_est"] == pytest.approx(2 ** -0.5, abs=1e-6)
    scan = load_series(out / "gap_scan.csv")
    assert set(scan) == {"s", "lambda_0", "lambda_1", "gap"}
    assert len(scan["s"]) == 1001
    out = tmp_path / "evo"
    assert run("evolve", "--builtin", "one-qubit-zx", "--time", 5, "--steps", "16,32", "--out", out) == 0
    evo = load_series(out / "evolution.csv")
    assert evo["n_s"] == [16, 32]
    assert evo["error"][1] < evo["error"][0]


def test_noise_study_cli(tmp_path):
    out = tmp_path / "noise"
    assert run("noise-study", "--builtin", "ch2-like", "--trial", "rhf", "--shots", 500, "--seed", 2,
               "--out", out) == 0
    doc = json.loads((out / "noise.json").read_text())
    assert doc["shots"] == 500 and doc["seed"] == 2


def test_pipeline_one_qubit_baseline(tmp_path):
    out = tmp_path / "p"
    assert run("pipeline", "--builtin", "one-qubit-zx", "--trial", "none", "--baseline-fock",
               "--grid", 1001, "--out", out) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "ok"
    assert summary["cells"][0]["t_est"] == pytest.approx(0.7071, abs=1e-3)
    assert load_series(out / "t_est_baseline-fock.csv")["R"] == [1.0]


def test_pipeline_krylov_series(tmp_path):
    out = tmp_path / "p"
    assert run("pipeline", "--builtin", "ch2-like", "--trial", "rhf,krylov", "--krylov-dim", "1,2,3",
               "--steps", "32", "--out", out) == 0
    for d in (1, 2, 3):
        series = load_series(out / f"t_est_krylov-d{d}.csv")
        assert series["R"] == [1.0]
        assert (out / f"gap_krylov-d{d}.csv").exists()
    cells = json.loads((out / "summary.json").read_text())["cells"]
    assert all("evolution" in c for c in cells)


def test_pipeline_reports_empty_kernel(tmp_path, capsys):
    code = run("pipeline", "--builtin", "one-qubit-zx", "--trial", "rhf", "--out", tmp_path / "p")
    assert code == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["status"] == "failed"
    assert err["errors"][0]["error"] == "EmptyKernelError"
    assert "remediation" in err["errors"][0]["message"]


def test_missing_file_is_machine_readable(tmp_path, capsys):
    assert run("parent", "--hamiltonian", tmp_path / "nope.txt", "--trial", "rhf") == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError"


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"builtin": "ch2-like", "rho": 0.5, "grid": 11, "krylov_dims": [1, 2]}))
    args = build_parser().parse_args(["pipeline", "--config", str(cfg), "--rho", "0.25"])
    loaded = load_config(args)
    assert loaded.rho == 0.25 and loaded.grid == 11 and loaded.krylov_dims == [1, 2]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"rhoo": 1}))
    assert run("pipeline", "--config", bad) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "parentasp", "estimate", "--builtin", "one-qubit-zx",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "T_est = 0.707107" in proc.stdout


def test_manifest_config(tmp_path):
    system = builtin_system("one-qubit-zx")
    data = tmp_path / "data"
    data.mkdir()
    save_hamiltonian(system.target, data / "hf.txt")
    save_hamiltonian(system.initial, data / "hi.txt")
    (data / "manifest.json").write_text(json.dumps([{"path": "hf.txt", "initial": "hi.txt", "R": 2.5}]))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"hamiltonians": str(data / "manifest.json"), "trials": ["none"],
                               "baseline_fock": True}))
    out = tmp_path / "out"
    assert run("pipeline", "--config", cfg, "--out", out) == 0
    assert load_series(out / "t_est_baseline-fock.csv")["R"] == [2.5]
    (data / "manifest.json").write_text("{}")
    assert run("pipeline", "--config", cfg, "--out", out) == 2
