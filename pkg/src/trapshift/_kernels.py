"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The only loop-heavy inner kernels in this package are the batch evaluations
of generalized-Laguerre recurrences that fill displacement-operator tables.
They are compiled with ``numba.njit`` when available; setting the environment
variable ``TRAPSHIFT_NO_NUMBA=1`` (or any non-empty value other than ``0``)
selects the vectorized numpy implementations instead.  Both paths evaluate
the same recurrence; ``benchmarks/bench_kernels.py`` compares them.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.special import gammaln


def _numba_disabled() -> bool:
    flag = os.environ.get("TRAPSHIFT_NO_NUMBA", "")
    return flag not in ("", "0")


def _py_laguerre(n: int, alpha: float, x: float) -> float:
    """L_n^alpha(x) by the three-term recurrence in n at fixed alpha."""
    if n == 0:
        return 1.0
    prev = 1.0
    cur = 1.0 + alpha - x
    for k in range(2, n + 1):
        prev, cur = cur, ((2.0 * k - 1.0 + alpha - x) * cur - (k - 1.0 + alpha) * prev) / k
    return cur


def _np_chi_magnitudes(eta: float, n_max: int) -> np.ndarray:
    """Real magnitude table m[n, n'] with chi_{nn'} = i^|n-n'| * m[n, n'].

    m[n, n'] = exp(-eta^2/2) * eta^|n-n'| * sqrt(n_<! / n_>!) * L_{n_<}^{|n-n'|}(eta^2),
    the factorial ratio taken through lgamma to stay finite at large n.
    """
    x = eta * eta
    nb = n_max + 1
    # lag[n, d] = L_n^d(x); recurrence in n, vectorized over the order d.
    lag = np.ones((nb, nb))
    if nb > 1:
        d = np.arange(nb, dtype=float)
        lag[1, :] = 1.0 + d - x
        for n in range(2, nb):
            lag[n, :] = ((2.0 * n - 1.0 + d - x) * lag[n - 1, :] - (n - 1.0 + d) * lag[n - 2, :]) / n
    idx = np.arange(nb)
    lo = np.minimum.outer(idx, idx)
    hi = np.maximum.outer(idx, idx)
    dd = hi - lo
    lg = gammaln(np.arange(nb, dtype=float) + 1.0)
    mag = math.exp(-0.5 * x) * (eta ** dd) * np.exp(0.5 * (lg[lo] - lg[hi])) * lag[lo, dd]
    return mag


_HAVE_NUMBA = False
if not _numba_disabled():
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAVE_NUMBA = False

if _HAVE_NUMBA:

    @njit(cache=True)
    def _nb_laguerre(n: int, alpha: float, x: float) -> float:
        if n == 0:
            return 1.0
        prev = 1.0
        cur = 1.0 + alpha - x
        for k in range(2, n + 1):
            nxt = ((2.0 * k - 1.0 + alpha - x) * cur - (k - 1.0 + alpha) * prev) / k
            prev = cur
            cur = nxt
        return cur

    @njit(cache=True)
    def _nb_chi_magnitudes(eta: float, n_max: int) -> np.ndarray:
        x = eta * eta
        nb = n_max + 1
        pref = math.exp(-0.5 * x)
        lg = np.empty(nb)
        for n in range(nb):
            lg[n] = math.lgamma(n + 1.0)
        mag = np.empty((nb, nb))
        for d in range(nb):
            etad = eta ** d
            prev = 1.0
            cur = 1.0 + d - x
            for n in range(nb - d):
                if n == 0:
                    lagval = 1.0
                elif n == 1:
                    lagval = cur
                else:
                    lagval = ((2.0 * n - 1.0 + d - x) * cur - (n - 1.0 + d) * prev) / n
                    prev = cur
                    cur = lagval
                v = pref * etad * math.exp(0.5 * (lg[n] - lg[n + d])) * lagval
                mag[n, n + d] = v
                mag[n + d, n] = v
        return mag

    laguerre_value = _nb_laguerre
    chi_magnitudes = _nb_chi_magnitudes
    NUMBA_ENABLED = True
else:
    laguerre_value = _py_laguerre
    chi_magnitudes = _np_chi_magnitudes
    NUMBA_ENABLED = False
