import json
import subprocess
import sys

import numpy as np
import pytest

from lrdmd.cli import main
from lrdmd.snapshots import TrajectorySet, load_snapshots, save_snapshots


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def read(path):
    return json.loads(open(path).read())


def test_fit_appendix(workdir):
    assert run("fit", "--appendix", "X1", "--method", "optimal", "--k", 1, "--out", "m.json") == 0
    doc = read("m.json")
    assert doc["report"]["residual_frobenius"] == pytest.approx(2.0, abs=1e-9)
    assert doc["rank"] == 1 and doc["tool"] == "lrdmd"
    assert (workdir / "m.P.f64").stat().st_size == 3 * 8


def test_fit_from_csv_fixture(workdir):
    # two single-step trajectories whose columns form the analytic X1 / Y pair
    X = np.array([[1.0, 0.0], [0.0, 10.0], [1.0, 10.0]])
    Y = np.array([[5.0, 0.0], [0.0, 2.0], [10.0, 0.0]])
    states = np.stack([np.stack([X[:, j], Y[:, j]]) for j in range(2)])
    save_snapshots(TrajectorySet(states), "x1.csv")
    assert run("fit", "--input", "x1.csv", "--k", 1, "--out", "m.json") == 0
    assert read("m.json")["report"]["residual_frobenius"] == pytest.approx(2.0, abs=1e-9)


def test_k_zero_is_usage_error(workdir, capsys):
    with pytest.raises(SystemExit) as info:
        run("fit", "--appendix", "X1", "--k", 0, "--out", "m.json")
    assert info.value.code == 2
    assert "--k" in capsys.readouterr().err


def test_k_too_large_is_usage_error(workdir):
    assert run("fit", "--appendix", "X1", "--k", 5, "--out", "m.json") == 2


def test_bad_input_file(workdir, capsys):
    (workdir / "bad.csv").write_text("1,2,1\n1,1,1.0\n1,2,nan\n")
    assert run("fit", "--input", "bad.csv", "--k", 1, "--out", "m.json") == 2
    assert "line 3" in capsys.readouterr().err


def test_not_converged_exit(workdir):
    code = run("fit", "--appendix", "X1", "--method", "nuclear", "--alpha", 1.0,
               "--max-iters", 1, "--tol", 1e-16, "--tol-rel", 1e-16, "--out", "m.json")
    assert code == 4


def test_factorize_and_simulate(workdir):
    run("fit", "--appendix", "X1", "--k", 1, "--out", "m.json")
    assert run("factorize", "--model", "m.json", "--out", "s.json") == 0
    doc = read("s.json")
    lam = doc["model"]["eigenvalues"][0]
    assert lam["re"] == pytest.approx(20 / 3, rel=1e-9) and lam["im"] == 0
    assert doc["reconstruction_check"]["status"] == "passed"

    (workdir / "theta.csv").write_text("1,0,1\n0,1,0\n")
    assert run("simulate", "--model", "m.json", "--theta", "theta.csv", "--T", 4, "--out", "pq.csv") == 0
    assert run("simulate", "--spectral", "s.json", "--theta", "theta.csv", "--T", 4, "--out", "sp.csv") == 0
    assert run("simulate", "--model", "m.json", "--form", "spectral", "--theta", "theta.csv",
               "--T", 4, "--format", "bin", "--out", "sp.bin") == 0
    pq = load_snapshots("pq.csv").states
    assert pq.shape == (2, 4, 3)
    np.testing.assert_allclose(load_snapshots("sp.csv").states, pq, rtol=1e-10)
    np.testing.assert_allclose(load_snapshots("sp.bin").states, pq, rtol=1e-10)
    assert (workdir / "sp.bin.meta.json").exists()


def test_simulate_dimension_mismatch(workdir):
    run("fit", "--appendix", "X1", "--k", 1, "--out", "m.json")
    (workdir / "theta.csv").write_text("1,0\n")
    assert run("simulate", "--model", "m.json", "--theta", "theta.csv", "--T", 3, "--out", "o.csv") == 2


def test_zero_operator_factorizes_to_empty_spectrum(workdir):
    save_snapshots(TrajectorySet(np.zeros((2, 3, 4))), "zero.csv")
    assert run("fit", "--input", "zero.csv", "--k", 1, "--out", "z.json") == 0
    assert run("factorize", "--model", "z.json", "--out", "zs.json") == 0
    assert read("zs.json")["model"]["rank"] == 0


def test_missing_artifact(workdir, capsys):
    assert run("factorize", "--model", "nope.json", "--out", "s.json") == 2
    run("fit", "--appendix", "X1", "--k", 1, "--out", "m.json")
    (workdir / "m.Q.f64").unlink()
    assert run("factorize", "--model", "m.json", "--out", "s.json") == 2
    assert "missing" in capsys.readouterr().err


def test_corrupted_block(workdir):
    run("fit", "--appendix", "X1", "--k", 1, "--out", "m.json")
    raw = bytearray((workdir / "m.P.f64").read_bytes())
    raw[0] ^= 1
    (workdir / "m.P.f64").write_bytes(bytes(raw))
    assert run("factorize", "--model", "m.json", "--out", "s.json") == 2


def test_compare(workdir):
    assert run("compare", "--appendix", "X1", "--k", "1", "--out", "cmp") == 0
    rows = read("cmp.json")["rows"]
    by = {r["estimator"]: r for r in rows}
    assert by["optimal"]["residual"] == pytest.approx(2.0, abs=1e-9)
    assert by["tls"]["residual"] == pytest.approx(11.09, abs=0.01)
    assert "wall_time" not in rows[0]
    lines = (workdir / "cmp.csv").read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1].startswith("estimator,k,")


def test_compare_all_failed(workdir):
    assert run("compare", "--appendix", "X1", "--k", "7", "--method", "optimal,truncated", "--out", "c") == 3


def test_bench(workdir):
    assert run("bench", "--n", "40,80", "--m", 5, "--k", 2, "--T", 6, "--repeats", 1, "--out", "b.csv") == 0
    lines = (workdir / "b.csv").read_text().splitlines()
    assert lines[0].startswith("# ") and len(lines) == 4


def test_config_defaults_and_unknown_keys(workdir):
    (workdir / "cfg.json").write_text(json.dumps({"method": "tls", "k": 1}))
    assert run("--config", "cfg.json", "fit", "--appendix", "X2", "--out", "m.json") == 0
    assert read("m.json")["method"] == "tls"
    (workdir / "bad.json").write_text(json.dumps({"nonsense": 1}))
    with pytest.raises(SystemExit) as info:
        run("--config", "bad.json", "fit", "--appendix", "X2", "--k", 1, "--out", "m.json")
    assert info.value.code == 2


def _pipeline(directory):
    (directory / "theta.csv").write_text("1,0,1\n")
    cmds = [
        ("fit", "--appendix", "X1", "--k", 1, "--method", "sparse", "--seed", 3, "--out", "m.json"),
        ("factorize", "--model", "m.json", "--seed", 3, "--out", "s.json"),
        ("simulate", "--model", "m.json", "--theta", "theta.csv", "--T", 5, "--out", "t.csv"),
        ("compare", "--appendix", "X2", "--k", "1,2", "--seed", 3, "--out", "c"),
    ]
    for c in cmds:
        assert run(*c) == 0
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_reruns_are_byte_identical(tmp_path, monkeypatch):
    outputs = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        monkeypatch.chdir(d)
        outputs.append(_pipeline(d))
    assert outputs[0] == outputs[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lrdmd", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("lrdmd ")
    proc = subprocess.run([sys.executable, "-m", "lrdmd", "fit", "--appendix", "X1", "--k", "0",
                           "--out", str(tmp_path / "m.json")], capture_output=True, text=True)
    assert proc.returncode == 2
