import json

import numpy as np
import pytest

from rpcakit.cli import main
from rpcakit.io import load_matrix, save_matrix
from rpcakit.model import Decomposition, relative_error


@pytest.fixture
def instance_dir(tmp_path):
    out = tmp_path / "inst"
    assert main(["gen", "--n", "30", "--cr", "0.1", "--cp", "0.05", "--snr", "inf",
                 "--seed", "7", "--out", str(out)]) == 0
    return out


def test_gen_files_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["gen", "--n", "100", "--cr", "0.05", "--cp", "0.05", "--snr", "inf", "--seed", "7"]
    assert main(args + ["--out", str(a)]) == 0
    printed = capsys.readouterr().out.split()
    assert len(printed) == 6 and printed[-1].endswith("instance.json")
    assert main(args + ["--out", str(b)]) == 0
    for f in sorted(a.iterdir()):
        if f.name != "config.json":
            assert f.read_bytes() == (b / f.name).read_bytes()
    # the echoed configs differ only in the output directory
    ca, cb = (json.loads((d / "config.json").read_text()) for d in (a, b))
    assert ca.pop("out") != cb.pop("out") and ca == cb


def test_gen_rejects_bad_field(tmp_path, capsys):
    code = main(["gen", "--n", "10", "--cr", "1.5", "--cp", "0.1", "--out", str(tmp_path)])
    assert code == 2
    assert "--cr" in capsys.readouterr().err


def test_gen_missing_value(tmp_path, capsys):
    assert main(["gen", "--n", "10", "--out", str(tmp_path)]) == 2
    assert "cr" in capsys.readouterr().err


def test_solve_converges_and_reproduces(instance_dir, tmp_path, capsys):
    base = ["solve", "--matrix", str(instance_dir / "M.bin"), "--solver", "admm2",
            "--truth-L", str(instance_dir / "L0.bin"), "--truth-S", str(instance_dir / "S0.bin"),
            "--clock", "virtual", "--max-iter", "300"]
    assert main(base + ["--out", str(tmp_path / "r1")]) == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["status"] == "converged"
    trace = (tmp_path / "r1" / "trace.csv").read_text().splitlines()
    assert len(trace) > 1
    assert main(base + ["--out", str(tmp_path / "r2")]) == 0
    assert (tmp_path / "r1" / "trace.csv").read_bytes() == (tmp_path / "r2" / "trace.csv").read_bytes()
    # rerun from the echoed config alone
    cfg = tmp_path / "r1" / "config.json"
    resolved = json.loads(cfg.read_text())
    resolved["out"] = str(tmp_path / "r3")
    cfg3 = tmp_path / "cfg3.json"
    cfg3.write_text(json.dumps(resolved))
    assert main(["solve", "--config", str(cfg3)]) == 0
    for name in ("trace.csv", "L.bin", "S.bin"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r3" / name).read_bytes()


def test_solve_iteration_cap_and_unknown(instance_dir, tmp_path, capsys):
    m = str(instance_dir / "M.bin")
    assert main(["solve", "--matrix", m, "--solver", "pgm", "--max-iter", "3",
                 "--out", str(tmp_path / "x")]) == 3
    assert main(["solve", "--matrix", m, "--solver", "foo", "--out", str(tmp_path / "y")]) == 2
    err = capsys.readouterr().err
    assert "foo" in err and "admm2" in err


def test_solve_set_option(instance_dir, tmp_path):
    m = str(instance_dir / "M.bin")
    assert main(["solve", "--matrix", m, "--solver", "admip", "--set", "beta_growth=0.5",
                 "--max-iter", "5", "--out", str(tmp_path / "z")]) in (0, 3)
    cfg = json.loads((tmp_path / "z" / "config.json").read_text())
    assert cfg["options"]["beta_growth"] == 0.5
    assert main(["solve", "--matrix", m, "--solver", "admip", "--set", "nonsense=1",
                 "--out", str(tmp_path / "w")]) == 2


def test_bench_two_series(tmp_path):
    cfg = {"specs": [{"id": "small", "n": 20, "c_r": 0.1, "c_p": 0.05, "seed": 1}],
           "solvers": [{"id": "admm2", "options": {"max_iter": 30}},
                       {"id": "godec", "options": {"max_iter": 30}}],
           "replications": 1, "grid_points": 10, "clock": "virtual"}
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(cfg))
    assert main(["bench", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    rows = (tmp_path / "o" / "aggregate.csv").read_text().splitlines()
    assert rows[0] == "spec_id,solver,grid_time_seconds,mean_rel_error,min_rel_error,max_rel_error"
    assert {r.split(",")[1] for r in rows[1:]} == {"admm2", "godec"}
    assert len(rows) == 21


def test_eval(tmp_path, capsys):
    rng = np.random.default_rng(0)
    L0, S0 = rng.standard_normal((4, 5)), rng.standard_normal((4, 5))
    L, S = rng.standard_normal((4, 5)), rng.standard_normal((4, 5))
    for name, X in dict(L0=L0, S0=S0, L=L, S=S, L2=2 * L0, Z=np.zeros((4, 5)),
                        bad=np.zeros((3, 5))).items():
        save_matrix(tmp_path / f"{name}.bin", X)
    p = {k: str(tmp_path / f"{k}.bin") for k in ("L0", "S0", "L", "S", "L2", "Z", "bad")}

    def run(l, s):
        capsys.readouterr()
        code = main(["eval", "--L", p[l], "--S", p[s], "--L0", p["L0"], "--S0", p["S0"]])
        return code, capsys.readouterr().out.strip()

    assert run("L0", "S0") == (0, "0")
    assert run("L2", "S0") == (0, "1")
    assert run("L2", "Z") == (0, "2")
    code, text = run("L", "S")
    assert code == 0
    assert float(text) == pytest.approx(relative_error(Decomposition(L, S), L0, S0), rel=1e-5)
    assert run("bad", "S")[0] == 2


def test_bad_config_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("[1, 2]")
    assert main(["eval", "--config", str(p)]) == 2
    assert main(["eval", "--config", str(tmp_path / "missing.json")]) == 2


def test_gen_config_rerun(tmp_path):
    assert main(["gen", "--n", "12", "--cr", "0.25", "--cp", "0.1", "--snr", "30",
                 "--seed", "2", "--out", str(tmp_path / "a")]) == 0
    cfg = json.loads((tmp_path / "a" / "config.json").read_text())
    cfg["out"] = str(tmp_path / "b")
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["gen", "--config", str(tmp_path / "c.json")]) == 0
    for name in ("M.bin", "N0.bin", "instance.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert np.array_equal(load_matrix(tmp_path / "b" / "M.bin"),
                          load_matrix(tmp_path / "a" / "M.bin"))
