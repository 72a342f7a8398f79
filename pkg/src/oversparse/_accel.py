"""Periodic filter-bank kernels with a numba path and a pure-numpy path.

The numba kernels are used when numba imports cleanly and the environment
variable ``OVERSPARSE_NO_NUMBA`` is unset (or ``0``). Both paths compute the
same sums; the numba loops accumulate taps in a fixed order so results do
not depend on threading.

Conventions (``n`` = signal length along the filtered axis, ``L`` = taps)::

    analysis   y[c, r, k]     = sum_m  h[c, m] * x[r, (2k + m) mod n]
    synthesis  x[r, (2k+m)%n] += h[c, m] * y[c, r, k]      (summed over c)

Synthesis is the exact adjoint of analysis, so for a tight-frame bank it
is also the inverse.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def numba_enabled():
    flag = os.environ.get("OVERSPARSE_NO_NUMBA", "").strip().lower()
    return numba is not None and flag in ("", "0", "false", "no")


# -- pure numpy -------------------------------------------------------------

def analysis_rows_numpy(x, bank):
    rows, n = x.shape
    taps = bank.shape[1]
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n
    # (rows, n/2, taps) x (channels, taps) -> (channels, rows, n/2)
    return np.einsum("rkm,cm->crk", x[:, idx], bank, optimize=True)


def synthesis_rows_numpy(y, bank, n):
    channels, rows, half = y.shape
    out = np.zeros((rows, n))
    base = 2 * np.arange(half)
    for m in range(bank.shape[1]):
        # 2k + m is distinct mod n for fixed m, so fancy-index += is safe
        out[:, (base + m) % n] += np.tensordot(bank[:, m], y, axes=(0, 0))
    return out


# -- numba ------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True)
    def analysis_rows_numba(x, bank):
        rows, n = x.shape
        channels, taps = bank.shape
        half = n // 2
        out = np.zeros((channels, rows, half))
        for c in range(channels):
            for r in range(rows):
                for k in range(half):
                    acc = 0.0
                    base = 2 * k
                    for m in range(taps):
                        acc += bank[c, m] * x[r, (base + m) % n]
                    out[c, r, k] = acc
        return out

    @numba.njit(cache=True)
    def synthesis_rows_numba(y, bank, n):
        channels, rows, half = y.shape
        taps = bank.shape[1]
        out = np.zeros((rows, n))
        for r in range(rows):
            for c in range(channels):
                for k in range(half):
                    v = y[c, r, k]
                    base = 2 * k
                    for m in range(taps):
                        out[r, (base + m) % n] += bank[c, m] * v
        return out

else:  # pragma: no cover
    analysis_rows_numba = None
    synthesis_rows_numba = None


def analysis_rows(x, bank):
    """Filter and decimate every row of ``x`` with each filter in ``bank``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    bank = np.ascontiguousarray(bank, dtype=np.float64)
    if numba_enabled():
        return analysis_rows_numba(x, bank)
    return analysis_rows_numpy(x, bank)


def synthesis_rows(y, bank, n):
    """Adjoint of :func:`analysis_rows`; returns rows of length ``n``."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    bank = np.ascontiguousarray(bank, dtype=np.float64)
    if numba_enabled():
        return synthesis_rows_numba(y, bank, n)
    return synthesis_rows_numpy(y, bank, n)


def analysis_cols(x, bank):
    out = analysis_rows(x.T, bank)
    return np.ascontiguousarray(out.transpose(0, 2, 1))


def synthesis_cols(y, bank, n):
    return np.ascontiguousarray(synthesis_rows(y.transpose(0, 2, 1), bank, n).T)
