"""A desk-scale error-versus-time benchmark, written as CSV for plotting elsewhere.

Run:  python demos/benchmark_grid.py [out_dir]
"""

import sys

from rpcakit.base import SolverOptions
from rpcakit.bench import SolverConfig, run_benchmark, write_outputs
from rpcakit.synthetic import SyntheticSpec

out_dir = sys.argv[1] if len(sys.argv) > 1 else "bench_out"

specs = {"n80_clean": SyntheticSpec(80, 0.05, 0.05, seed=0),
         "n80_snr40": SyntheticSpec(80, 0.05, 0.05, 40.0, seed=50)}

# Oracle parameters (sigma, rank, support size) come from each instance
# unless a config overrides them.  Wall-clock time is used here; pass
# clock="virtual" to get timing-independent, byte-reproducible output.
opts = SolverOptions(max_iter=300)
solvers = [SolverConfig("admm2", opts),
           SolverConfig("admip", opts),
           SolverConfig("apgm", opts, {"mu": 20.0}),
           SolverConfig("godec", opts),
           SolverConfig("lmafit", opts)]

result = run_benchmark(specs, solvers, replications=3, grid_points=60)
paths = write_outputs(result, out_dir)

print(f"{'spec':<11}{'solver':<8}{'t_end (s)':>10}{'mean err':>11}{'min':>10}{'max':>10}")
for s in result.series:
    print(f"{s.spec_id:<11}{s.solver:<8}{s.grid[-1]:>10.3f}{s.mean[-1]:>11.2e}"
          f"{s.min[-1]:>10.2e}{s.max[-1]:>10.2e}")
print(f"\naggregate: {paths['aggregate']}\nfailures:  {len(result.failures)}")

# admm2 ignores sigma and fits M exactly, so on the noisy spec it settles at
# the noise floor of the equality model rather than the SPCP solution.
