import numpy as np
import pytest

from rpcakit.base import SolverOptions
from rpcakit.bench import (SolverConfig, interpolate, read_aggregate_csv, run_benchmark,
                           write_outputs)
from rpcakit.synthetic import SyntheticSpec

VIRTUAL = SolverOptions(max_iter=40, clock="virtual")


def test_interpolate_holds_last_value():
    class R:
        def __init__(self, t, e):
            self.elapsed_seconds, self.rel_error = t, e

    recs = [R(0.0, 1.0), R(1.0, 0.5), R(2.0, 0.1)]
    np.testing.assert_allclose(interpolate(recs, [0.0, 0.5, 2.0, 5.0]), [1.0, 0.75, 0.1, 0.1])


def test_single_replication_equals_trace():
    spec = SyntheticSpec(20, 0.1, 0.05, seed=3)
    res = run_benchmark([spec], [SolverConfig("admm2", VIRTUAL)], grid_points=30)
    (s,) = res.series
    run = res.runs[0]
    np.testing.assert_array_equal(s.mean, s.min)
    np.testing.assert_array_equal(s.mean, interpolate(run.records, s.grid))
    assert s.grid[-1] == run.records[-1].elapsed_seconds


def test_identical_seeds_have_zero_spread():
    # two specs pinned to the same seed produce identical series
    a = SyntheticSpec(20, 0.1, 0.05, seed=8)
    res = run_benchmark({"a": a, "b": a}, [SolverConfig("ialm", VIRTUAL)], grid_points=20)
    sa, sb = res.series
    np.testing.assert_array_equal(sa.mean, sb.mean)
    np.testing.assert_array_equal(sa.max - sa.min, 0 * sa.mean)


def test_envelope_and_seed_schedule():
    spec = SyntheticSpec(30, 0.1, 0.05, seed=10)
    cfgs = [SolverConfig("admm2", VIRTUAL), SolverConfig("apgm", VIRTUAL,
                                                         {"mu": 0.1})]
    res = run_benchmark([spec], cfgs, replications=3, grid_points=25)
    assert sorted({r.seed for r in res.runs}) == [10, 11, 12]
    for s in res.series:
        raw = np.array([interpolate(r.records, s.grid) for r in res.runs if r.solver == s.solver])
        np.testing.assert_array_equal(s.min, raw.min(axis=0))
        np.testing.assert_array_equal(s.max, raw.max(axis=0))
        assert np.all(s.min <= s.mean) and np.all(s.mean <= s.max)


def test_failed_cell_is_recorded(tmp_path):
    spec = SyntheticSpec(10, 0.2, 0.1, seed=0)
    cfgs = [SolverConfig("godec", VIRTUAL, {"rank_cap": 50}), SolverConfig("admm2", VIRTUAL)]
    res = run_benchmark([spec], cfgs, replications=2)
    assert len(res.failures) == 2 and {f.solver for f in res.failures} == {"godec"}
    assert [s.solver for s in res.series] == ["admm2"]
    paths = write_outputs(res, tmp_path)
    lines = paths["failures"].read_text().splitlines()
    assert len(lines) == 3 and "godec" in lines[1]


def test_jobs_do_not_change_results(tmp_path):
    specs = [SyntheticSpec(20, 0.1, 0.05, seed=1), SyntheticSpec(24, 0.1, 0.05, 40.0, seed=2)]
    cfgs = [SolverConfig("admm2", VIRTUAL), SolverConfig("godec", VIRTUAL)]
    one = write_outputs(run_benchmark(specs, cfgs, replications=2, jobs=1), tmp_path / "a")
    two = write_outputs(run_benchmark(specs, cfgs, replications=2, jobs=2), tmp_path / "b")
    assert one["aggregate"].read_bytes() == two["aggregate"].read_bytes()
    agg = read_aggregate_csv(one["aggregate"])
    assert set(agg) == {(f"spec{i}", s) for i in (0, 1) for s in ("admm2", "godec")}
    assert (tmp_path / "a" / "raw" / "spec1" / "godec" / "rep1.csv").exists()


def test_argument_validation():
    spec = SyntheticSpec(10, 0.2, 0.1)
    with pytest.raises(ValueError):
        run_benchmark([], ["admm2"])
    with pytest.raises(ValueError):
        run_benchmark([spec], [])
    with pytest.raises(ValueError):
        run_benchmark([spec], ["admm2"], replications=0)
    with pytest.raises(KeyError):
        run_benchmark([spec], ["nope"])
