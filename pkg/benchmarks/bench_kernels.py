"""Numba vs numpy timings for the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both implementations are called directly (the ``SYMMES_BACKEND`` flag only
picks which one the library dispatches to), after one warm-up call so numba
compilation is excluded.  Outputs are compared as well as timed.
"""

import argparse
import time

import numpy as np

from symmes import kernels
from symmes._backend import HAVE_NUMBA
from symmes.symcheck import P_SYM2, SINGLET, PairMapSpec
from symmes.symspace import haar_unitary2


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def channel(x, spec, kernel):
    out = np.zeros_like(x)
    for i, j in spec.pairs:
        kernel(x, out, spec.n, i, j, P_SYM2, SINGLET, spec.tail, 1.0 / len(spec.pairs))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rows = []
    us = haar_unitary2(0, size=2000)
    for n in (4, 10, 20):
        a = kernels.irrep_batch_numba(us, n)
        b = kernels.irrep_batch_numpy(us, n)
        t_nb = best_of(lambda: kernels.irrep_batch_numba(us, n), args.repeat)
        t_np = best_of(lambda: kernels.irrep_batch_numpy(us, n), args.repeat)
        rows.append((f"irrep x2000, n={n}", t_nb, t_np, np.max(np.abs(a - b))))

    rng = np.random.default_rng(0)
    for n in (6, 8, 10):
        spec = PairMapSpec(n)
        x = rng.standard_normal((spec.dim, spec.dim))
        a = channel(x, spec, kernels.pair_map_accumulate_numba)
        b = channel(x, spec, kernels.pair_map_accumulate_numpy)
        t_nb = best_of(lambda: channel(x, spec, kernels.pair_map_accumulate_numba), args.repeat)
        t_np = best_of(lambda: channel(x, spec, kernels.pair_map_accumulate_numpy), args.repeat)
        rows.append((f"channel, n={n}", t_nb, t_np, np.max(np.abs(a - b))))

    print(f"{'kernel':<22}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, t_nb, t_np, diff in rows:
        print(f"{name:<22}{t_nb:>12.4g}{t_np:>12.4g}{t_np / t_nb:>10.2f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
