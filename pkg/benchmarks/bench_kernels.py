"""Compare the numba and numpy iteration kernels on real distillation maps.

    python benchmarks/bench_kernels.py [--starts 500] [--repeat 5]

Both backends are imported directly, so the MSD_DISABLE_NUMBA switch is not
needed here.  The two backends share one operation order, so results are
checked for bitwise agreement before timing.
"""
import argparse
import time

import numpy as np

from msd.analysis import OCTAHEDRON_MARGIN, OCTAHEDRON_PATIENCE
from msd.cws import CwsCode, Graph
from msd.distill import compile_map
from msd.kernels import _numba, _numpy
from msd.registry import builtin

MAX_ITERS = 500
TOL = 1e-12


def run(impl, m, starts):
    nb = len(starts)
    final = np.empty((nb, 3))
    status = np.empty(nb, np.int64)
    iters = np.empty(nb, np.int64)
    psucc = np.empty(nb)
    impl.iterate_batch(m.exps, m.coef, np.ascontiguousarray(m.rotation_matrix), m.n, starts, MAX_ITERS, TOL,
                       OCTAHEDRON_MARGIN, OCTAHEDRON_PATIENCE, final, status, iters, psucc)
    return final, status, iters


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--starts", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    starts = rng.normal(size=(args.starts, 3))
    starts /= np.linalg.norm(starts, axis=1)[:, None]
    starts = np.ascontiguousarray(starts)

    cases = {
        "3-qubit generator code": compile_map(builtin("eq8_3qubit")),
        "5-cycle, X correction": compile_map(builtin("perfect_5qubit_cws")),
        "6-vertex CWS code": compile_map(CwsCode(Graph.from_bits(6, "000010010100000"), (0, 0, 0, 1, 1, 1))),
        "Steane, twirled": compile_map(builtin("steane_7qubit")),
    }
    print(f"{'map':<26}{'n':>3}{'terms':>7}{'numba ms':>11}{'numpy ms':>11}{'speedup':>9}  agree")
    for name, m in cases.items():
        run(_numba, m, starts[:2])  # compile outside the timed region
        f1, s1, i1 = run(_numba, m, starts)
        f2, s2, i2 = run(_numpy, m, starts)
        agree = np.array_equal(s1, s2) and np.array_equal(i1, i2) and np.array_equal(f1, f2)
        t_nb = best_of(lambda: run(_numba, m, starts), args.repeat)
        t_np = best_of(lambda: run(_numpy, m, starts), args.repeat)
        print(f"{name:<26}{m.n:>3}{len(m.exps):>7}{t_nb * 1e3:>11.2f}{t_np * 1e3:>11.2f}{t_np / t_nb:>9.1f}  {agree}")


if __name__ == "__main__":
    main()
