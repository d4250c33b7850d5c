#!/usr/bin/env python3
"""Compare the numba and numpy paths of the coupling-table kernels.

Run with ``python benchmarks/bench_kernels.py``.  The same script honors
``TRAPSHIFT_NO_NUMBA=1`` indirectly: the numba column is skipped when the
compiled path is unavailable.
"""

import time

import numpy as np

from trapshift import _kernels

SIZES = (50, 100, 200, 400)
ETA = 0.4
REPEATS = 5


def best_of(fn, *args) -> float:
    times = []
    for _ in range(REPEATS):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return min(times)


def main() -> None:
    have_numba = _kernels.NUMBA_ENABLED
    if have_numba:
        _kernels.chi_magnitudes(ETA, 10)  # trigger compilation outside timing
        header = f"{'n_max':>6} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8}"
    else:
        header = f"{'n_max':>6} {'numpy [ms]':>12}   (numba path unavailable)"
    print(f"coupling-table kernel, eta = {ETA}, best of {REPEATS}")
    print(header)
    for n_max in SIZES:
        t_np = best_of(_kernels._np_chi_magnitudes, ETA, n_max)
        if have_numba:
            t_nb = best_of(_kernels.chi_magnitudes, ETA, n_max)
            diff = np.abs(
                _kernels._np_chi_magnitudes(ETA, n_max) - _kernels.chi_magnitudes(ETA, n_max)
            ).max()
            print(
                f"{n_max:>6} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} "
                f"{t_np / t_nb:>7.1f}x   (max diff {diff:.1e})"
            )
        else:
            print(f"{n_max:>6} {t_np * 1e3:>12.3f}")


if __name__ == "__main__":
    main()
