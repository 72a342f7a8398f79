"""Embedded wavelet filter tables.

Coefficients live in ``data/filters.txt``, one filter per line::

    <set> <stage> <tree> <band> <tap0>,<tap1>,...

``stage`` is ``first`` or ``later``; ``tree`` is ``a`` (real tree) or ``b``
(imaginary tree); ``band`` 0 is the low-pass filter. Published tables are
kept verbatim so they can be diffed against the original distributions.
Two-channel tables printed with 8 significant digits are projected onto
exact orthonormality at load time (see :func:`orthonormalize_lowpass`).
"""

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

FIRST = "first"
LATER = "later"
TREES = ("a", "b")


@dataclass(frozen=True)
class FilterSet:
    """Analysis filters for one transform family.

    ``banks[(stage, tree)]`` is a ``(channels, taps)`` array with the
    low-pass filter in row 0. Synthesis uses the same taps (adjoint).
    Single-tree sets only carry tree ``a``.
    """

    name: str
    banks: dict

    @property
    def trees(self):
        return tuple(t for t in TREES if (FIRST, t) in self.banks)

    @property
    def channels(self):
        return self.banks[(FIRST, "a")].shape[0]

    def bank(self, level, tree):
        """Bank used at decomposition ``level`` (1 = finest)."""
        stage = FIRST if level == 1 else LATER
        return self.banks[(stage, tree)]


def _pad_bank(rows):
    taps = max(len(r) for r in rows)
    out = np.zeros((len(rows), taps))
    for i, r in enumerate(rows):
        out[i, : len(r)] = r
    return out


def parse_table(text):
    """Parse the filter-table text format into ``{set: {(stage, tree): bank}}``."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 4)
        if len(parts) != 5:
            raise ValueError(f"filters.txt line {lineno}: expected 5 fields")
        name, stage, tree, band, taps = parts
        if stage not in (FIRST, LATER) or tree not in TREES:
            raise ValueError(f"filters.txt line {lineno}: bad stage/tree")
        values = [float(v) for v in taps.split(",")]
        raw.setdefault(name, {}).setdefault((stage, tree), {})[int(band)] = values
    tables = {}
    for name, entries in raw.items():
        tables[name] = {}
        for key, bands in entries.items():
            if sorted(bands) != list(range(len(bands))):
                raise ValueError(f"filter set {name} {key}: missing band")
            tables[name][key] = _pad_bank([bands[b] for b in range(len(bands))])
    return tables


def orthonormalize_lowpass(h, tol=1e-15, max_iter=50):
    """Nearest (Gauss-Newton, minimum-norm) orthonormal CQF low-pass to ``h``.

    Enforces ``sum_n h[n] h[n - 2k] = delta[k]`` and ``H(pi) = 0``. The
    zero at pi is imposed directly because it is only implied to within the
    square root of the orthogonality residual; ``sum h = sqrt(2)`` then holds
    to rounding.
    """
    h = np.asarray(h, dtype=float).copy()
    taps = h.size
    lags = range(0, (taps + 1) // 2)
    alt = (-1.0) ** np.arange(taps)

    def residual(v):
        r = [np.dot(v[: taps - 2 * k], v[2 * k:]) - (k == 0) for k in lags]
        r.append(np.dot(alt, v))
        return np.array(r)

    for _ in range(max_iter):
        r = residual(h)
        if np.max(np.abs(r)) < tol:
            break
        jac = np.empty((r.size, taps))
        for i, k in enumerate(lags):
            row = np.zeros(taps)
            row[: taps - 2 * k] += h[2 * k:]
            row[2 * k:] += h[: taps - 2 * k]
            jac[i] = row
        jac[-1] = alt
        h -= np.linalg.lstsq(jac, r, rcond=None)[0]
    return h


def alternating_flip(h):
    """CQF high-pass partner: ``g[n] = (-1)^n h[L-1-n]``."""
    h = np.asarray(h, dtype=float)
    return ((-1.0) ** np.arange(h.size)) * h[::-1]


def _orthonormal_bank(bank):
    lo = orthonormalize_lowpass(bank[0])
    hi = alternating_flip(lo)
    if np.max(np.abs(hi - bank[1])) > 1e-7:
        raise ValueError("stored high-pass is not the CQF partner of the low-pass")
    return np.vstack([lo, hi])


@lru_cache(maxsize=None)
def _load_tables():
    text = resources.files("oversparse").joinpath("data/filters.txt").read_text()
    tables = parse_table(text)
    for banks in tables.values():
        for key, bank in banks.items():
            if bank.shape[0] == 2:
                banks[key] = _orthonormal_bank(bank)
            bank.setflags(write=False)
            banks[key].setflags(write=False)
    return tables


# transform kind name -> filter set name
_SET_FOR_KIND = {
    "DWT": "farras",
    "DT_COMPLEX": "dualtree",
    "DD_DWT": "doubledensity",
    "DD_DT_REAL": "ddtree",
    "DD_DT_COMPLEX": "ddtree",
}


def builtin_filters(kind):
    """Return the embedded :class:`FilterSet` for a transform kind.

    >>> builtin_filters("DWT").channels
    2
    """
    key = getattr(kind, "name", kind)
    name = _SET_FOR_KIND[key]
    return FilterSet(name=name, banks=dict(_load_tables()[name]))
