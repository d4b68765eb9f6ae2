#!/usr/bin/env python3
"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--quick]

Each row reports the best-of-N wall time per call for both backends on the
same input, after one untimed call to trigger JIT compilation, plus the max
absolute difference between their outputs.
"""

import argparse
import time

import numpy as np

from cavity_dj._kernels import numba_impl, numpy_impl


def best_time(fn, args, repeat):
    fn(*args)  # compile / warm caches
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def cases(quick):
    rng = np.random.default_rng(0)
    sizes = (8, 12) if quick else (8, 12, 16, 20)
    for n in sizes:
        # Hadamard on n register qubits, cavity of dim 2 riding along
        a = random_complex(rng, (2**n, 2))
        yield f"fwht n={n}", "fwht", (a,)
    for n in sizes:
        # dispersive phase oracle on 2^n x 2
        amps = random_complex(rng, 2 ** (n + 1))
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, amps.size))
        yield f"phase_multiply n={n}", "phase_multiply", (amps, phases)
    for n in sizes[:3]:
        # single-atom gate on the middle atom of n atoms x cavity dim 26
        left, right = 2 ** (n // 2), 2 ** (n - n // 2 - 1) * 26
        op = random_complex(rng, (3, 3))
        psi = random_complex(rng, (left, 3, right))
        yield f"apply_local 3x3 n={n}", "apply_local", (op, psi)
    for n in sizes[:3]:
        psi = random_complex(rng, (2**n, 26, 1))
        yield f"reduced_density cavity n={n}", "reduced_density", (psi,)
        yield f"marginal_probs cavity n={n}", "marginal_probs", (psi,)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args()

    if numba_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"{'kernel':<32}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}{'max |diff|':>12}")
    for label, name, inputs in cases(args.quick):
        f_np = getattr(numpy_impl, name)
        f_nb = getattr(numba_impl, name)
        t_np = best_time(f_np, inputs, args.repeat)
        t_nb = best_time(f_nb, inputs, args.repeat)
        diff = float(np.max(np.abs(f_np(*inputs) - f_nb(*inputs))))
        print(f"{label:<32}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>9.2f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
