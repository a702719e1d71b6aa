"""Compare the numba and numpy backends of the batched kernels.

Run with ``python3 benchmarks/bench_kernels.py [--batch N] [--repeat R]``.
Each kernel is timed on identical random inputs with both backends after a
warm-up call (so numba compilation is excluded), and the largest
disagreement between the two outputs is reported alongside the timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from wmloc import _kernels
from wmloc.channels import kraus_stack


def random_hermitian(rng, batch, n):
    a = rng.normal(size=(batch, n, n)) + 1j * rng.normal(size=(batch, n, n))
    return (a + np.conj(np.swapaxes(a, -1, -2))) / 2


def random_states(rng, batch, n):
    a = rng.normal(size=(batch, n, n)) + 1j * rng.normal(size=(batch, n, n))
    rho = a @ np.conj(np.swapaxes(a, -1, -2))
    return rho / np.trace(rho, axis1=-2, axis2=-1)[:, None, None]


def best_time(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(batch, rng):
    h4 = random_hermitian(rng, batch, 4)
    m4 = random_hermitian(rng, batch, 4) @ random_hermitian(rng, batch, 4)
    rho8 = random_states(rng, batch, 8)
    op = np.array([[0.8, 0.1], [0.0, 0.6]], dtype=complex)
    ad = kraus_stack("ad", rng.uniform(size=batch))
    dp = kraus_stack("dp", rng.uniform(size=batch))
    diags = np.stack([np.ones(batch), np.sqrt(1 - rng.uniform(size=batch))], axis=-1)
    return {
        "eigh 4x4": lambda b: _kernels.eigh_batch(h4, backend=b)[0],
        "svdvals 4x4": lambda b: _kernels.svdvals_batch(m4, backend=b),
        "congruence 8x8": lambda b: _kernels.congruence_batch(rho8, op, 2, 3, backend=b),
        "kraus(ad) 8x8": lambda b: _kernels.kraus_batch(rho8, ad, 1, 3, backend=b),
        "kraus(dp) 8x8": lambda b: _kernels.kraus_batch(rho8, dp, 2, 3, backend=b),
        "diag 8x8": lambda b: _kernels.diag_congruence_batch(rho8, diags, 1, 3, backend=b),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(7)
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; timing the numpy backend only")
    print(f"batch={args.batch} repeat={args.repeat}")
    print(f"{'kernel':<16} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, fn in cases(args.batch, rng).items():
        t_np, out_np = best_time(lambda: fn("numpy"), args.repeat)
        if _kernels.HAVE_NUMBA:
            t_nb, out_nb = best_time(lambda: fn("numba"), args.repeat)
            diff = float(np.max(np.abs(np.sort(out_np, axis=-1) - np.sort(out_nb, axis=-1))))
            print(f"{name:<16} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x {diff:>11.2e}")
        else:
            print(f"{name:<16} {t_np:>10.4f} {'-':>10} {'-':>8} {'-':>11}")


if __name__ == "__main__":
    main()
