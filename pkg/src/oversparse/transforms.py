"""Periodic 2-D wavelet frames: DWT, dual-tree complex, double-density and
double-density dual-tree.

Every transform here is a Parseval frame (``inverse`` is the adjoint of
``forward`` and ``inverse(forward(x)) == x``). Multi-tree kinds scale the
input by 1/2 so the four separable trees together preserve energy.

Subband orientation labels name the filter applied along axis 0 then along
axis 1: ``L``/``H`` for two-channel banks, ``L``/``H1``/``H2`` for the
double-density banks (so ``"H1H2"`` is high-pass 1 down the columns and
high-pass 2 along the rows).
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from math import log2

import numpy as np

from . import _accel
from .errors import DimensionError, SubbandError
from .filters import builtin_filters

SQRT2 = np.sqrt(2.0)


class TransformKind(Enum):
    DWT = "dwt"
    DT_COMPLEX = "dt-complex"
    DD_DWT = "dd-dwt"
    DD_DT_REAL = "dd-dt-real"
    DD_DT_COMPLEX = "dd-dt-complex"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown transform kind {value!r}")

    @property
    def dual_tree(self):
        return self in (TransformKind.DT_COMPLEX, TransformKind.DD_DT_REAL,
                        TransformKind.DD_DT_COMPLEX)

    @property
    def complex_valued(self):
        return self in (TransformKind.DT_COMPLEX, TransformKind.DD_DT_COMPLEX)


# separable tree pairs (axis-0 tree, axis-1 tree)
_SEPARABLE = ("aa", "bb", "ab", "ba")


@dataclass(frozen=True)
class Subband:
    tree: str
    level: int
    orientation: str
    data: np.ndarray

    @property
    def key(self):
        return (self.tree, self.level, self.orientation)


@dataclass
class WaveletCoeffs:
    """Container for the output of :func:`forward`.

    ``subbands`` holds detail bands in a fixed order (level, orientation,
    tree); ``lowpass`` maps each separable tree to its coarsest residual.
    """

    kind: TransformKind
    levels: int
    shape: tuple
    subbands: list
    lowpass: dict = field(default_factory=dict)

    def __post_init__(self):
        self._index = {sb.key: i for i, sb in enumerate(self.subbands)}

    def __getitem__(self, key):
        try:
            return self.subbands[self._index[tuple(key)]]
        except KeyError:
            raise SubbandError(f"no subband {key!r} in {self.kind.name} coefficients") from None

    def keys(self):
        return [sb.key for sb in self.subbands]

    def count(self):
        """Number of real values stored (complex entries count twice)."""
        n = sum(sb.data.size * (2 if np.iscomplexobj(sb.data) else 1)
                for sb in self.subbands)
        return n + sum(a.size for a in self.lowpass.values())

    def map(self, fn, lowpass=False):
        """New coefficients with ``fn`` applied to every detail array."""
        subbands = [replace(sb, data=fn(sb.data)) for sb in self.subbands]
        low = {t: (fn(a) if lowpass else a.copy()) for t, a in self.lowpass.items()}
        return WaveletCoeffs(self.kind, self.levels, self.shape, subbands, low)

    def zeros_like(self):
        return self.map(np.zeros_like, lowpass=True)

    def scaled(self, factor):
        return self.map(lambda a: a * factor, lowpass=True)

    def detail_energy(self):
        return float(sum(np.sum(np.abs(sb.data) ** 2) for sb in self.subbands))

    def max_detail(self):
        return max((float(np.max(np.abs(sb.data))) for sb in self.subbands), default=0.0)


def _band_labels(channels):
    if channels == 2:
        return ["L", "H"]
    return ["L"] + [f"H{i}" for i in range(1, channels)]


def orientations(kind):
    """Detail orientation labels per level, in storage order."""
    labels = _band_labels(builtin_filters(kind).channels)
    return [a + b for a in labels for b in labels if (a, b) != ("L", "L")]


def hh_orientations(kind):
    """Orientation labels of the diagonal (high-pass x high-pass) bands."""
    return [o for o in orientations(kind) if not o.startswith("L") and "L" not in o]


def stored_trees(kind):
    """Tree ids carried by detail subbands of ``kind``."""
    if not kind.dual_tree:
        return ("a",)
    if kind is TransformKind.DD_DT_REAL:
        return ("re+", "re-", "im+", "im-")
    return ("+", "-")


def coefficient_count(kind, shape, levels):
    """Exact number of real values produced by ``forward`` for this layout.

    With ``P`` pixels, ``D`` real detail bands per level (over all trees) and
    ``T`` low-pass residuals, the count is
    ``D * P * sum_{j=1..J} 4**-j + T * P * 4**-J``.
    """
    kind = TransformKind.parse(kind)
    channels = builtin_filters(kind).channels
    trees = 4 if kind.dual_tree else 1
    detail = (channels * channels - 1) * trees
    pixels = shape[0] * shape[1]
    total = sum(detail * pixels // 4 ** j for j in range(1, levels + 1))
    return total + trees * pixels // 4 ** levels


def redundancy(kind, shape, levels):
    return coefficient_count(kind, shape, levels) / (shape[0] * shape[1])


def check_layout(shape, levels):
    if levels < 1:
        raise DimensionError("levels must be >= 1")
    if len(shape) != 2:
        raise DimensionError(f"expected a 2-D image, got shape {shape}")
    max_levels = int(log2(min(shape))) if min(shape) > 0 else 0
    if levels > max_levels:
        raise DimensionError(f"levels={levels} exceeds log2(min dimension)={max_levels}")
    step = 2 ** levels
    if shape[0] % step or shape[1] % step:
        raise DimensionError(f"image shape {shape} not divisible by 2**levels={step}")


# -- separable single-tree analysis / synthesis -------------------------------

def _separable_forward(x, fs, t0, t1, levels):
    details = []  # per level: {(i0, i1): array}
    current = x
    for level in range(1, levels + 1):
        b0, b1 = fs.bank(level, t0), fs.bank(level, t1)
        rows = _accel.analysis_rows(current, b1)
        bands = {}
        for i1 in range(rows.shape[0]):
            cols = _accel.analysis_cols(rows[i1], b0)
            for i0 in range(cols.shape[0]):
                bands[(i0, i1)] = cols[i0]
        current = bands.pop((0, 0))
        details.append(bands)
    return details, current


def _separable_inverse(details, low, fs, t0, t1):
    current = low
    for level in range(len(details), 0, -1):
        b0, b1 = fs.bank(level, t0), fs.bank(level, t1)
        bands = dict(details[level - 1])
        bands[(0, 0)] = current
        c0, c1 = b0.shape[0], b1.shape[0]
        h, w = current.shape
        rows = np.empty((c1, 2 * h, w))
        for i1 in range(c1):
            stack = np.stack([bands[(i0, i1)] for i0 in range(c0)])
            rows[i1] = _accel.synthesis_cols(stack, b0, 2 * h)
        current = _accel.synthesis_rows(rows, b1, 2 * w)
    return current


def _trees_for(kind, fs):
    return _SEPARABLE if kind.dual_tree else ("aa",)


def forward(img, kind, levels=3):
    """Forward transform of a real 2-D image."""
    kind = TransformKind.parse(kind)
    x = np.asarray(img, dtype=np.float64)
    check_layout(x.shape, levels)
    if not np.all(np.isfinite(x)):
        raise ValueError("image contains non-finite values")
    fs = builtin_filters(kind)
    labels = _band_labels(fs.channels)
    if kind.dual_tree:
        x = x * 0.5
    per_tree, lowpass = {}, {}
    for pair in _trees_for(kind, fs):
        details, low = _separable_forward(x, fs, pair[0], pair[1], levels)
        per_tree[pair], lowpass[pair] = details, low

    band_ids = [(i0, i1) for i0 in range(fs.channels) for i1 in range(fs.channels)
                if (i0, i1) != (0, 0)]
    subbands = []
    for level in range(1, levels + 1):
        for (i0, i1) in band_ids:
            orient = labels[i0] + labels[i1]
            if not kind.dual_tree:
                subbands.append(Subband("a", level, orient, per_tree["aa"][level - 1][(i0, i1)]))
                continue
            a, b, c, d = (per_tree[p][level - 1][(i0, i1)] for p in _SEPARABLE)
            re_p, re_m = (a - b) / SQRT2, (a + b) / SQRT2
            im_p, im_m = (c + d) / SQRT2, (c - d) / SQRT2
            if kind is TransformKind.DD_DT_REAL:
                for tree, arr in (("re+", re_p), ("re-", re_m), ("im+", im_p), ("im-", im_m)):
                    subbands.append(Subband(tree, level, orient, arr))
            else:
                subbands.append(Subband("+", level, orient, re_p + 1j * im_p))
                subbands.append(Subband("-", level, orient, re_m + 1j * im_m))
    if not kind.dual_tree:
        lowpass = {"a": lowpass["aa"]}
    return WaveletCoeffs(kind, levels, tuple(x.shape), subbands, lowpass)


def _index_bands(coeffs, labels):
    lookup = {lab: i for i, lab in enumerate(labels)}
    out = {}
    for sb in coeffs.subbands:
        o = sb.orientation
        # split the label into its two band names
        for cut in range(1, len(o)):
            if o[:cut] in lookup and o[cut:] in lookup:
                out[(sb.tree, sb.level, (lookup[o[:cut]], lookup[o[cut:]]))] = sb.data
                break
        else:
            raise SubbandError(f"bad orientation label {o!r}")
    return out


def inverse(coeffs):
    """Synthesis (adjoint) operator; exact inverse of :func:`forward`."""
    kind = coeffs.kind
    fs = builtin_filters(kind)
    labels = _band_labels(fs.channels)
    levels = coeffs.levels
    check_layout(coeffs.shape, levels)
    bands = _index_bands(coeffs, labels)
    h, w = coeffs.shape
    band_ids = [(i0, i1) for i0 in range(fs.channels) for i1 in range(fs.channels)
                if (i0, i1) != (0, 0)]

    def expect(arr, level):
        want = (h // 2 ** level, w // 2 ** level)
        if arr.shape != want:
            raise DimensionError(f"subband at level {level} has shape {arr.shape}, expected {want}")
        return arr

    def get(tree, level, bid):
        try:
            return expect(bands[(tree, level, bid)], level)
        except KeyError:
            raise DimensionError(f"missing subband tree={tree} level={level} band={bid}") from None

    if not kind.dual_tree:
        details = [{bid: np.real(get("a", lv, bid)) for bid in band_ids}
                   for lv in range(1, levels + 1)]
        return _separable_inverse(details, expect(coeffs.lowpass["a"], levels), fs, "a", "a")

    per_tree = {p: [] for p in _SEPARABLE}
    for level in range(1, levels + 1):
        split = {p: {} for p in _SEPARABLE}
        for bid in band_ids:
            if kind is TransformKind.DD_DT_REAL:
                re_p, re_m = get("re+", level, bid), get("re-", level, bid)
                im_p, im_m = get("im+", level, bid), get("im-", level, bid)
            else:
                zp, zm = get("+", level, bid), get("-", level, bid)
                re_p, im_p, re_m, im_m = zp.real, zp.imag, zm.real, zm.imag
            split["aa"][bid] = (re_p + re_m) / SQRT2
            split["bb"][bid] = (re_m - re_p) / SQRT2
            split["ab"][bid] = (im_p + im_m) / SQRT2
            split["ba"][bid] = (im_p - im_m) / SQRT2
        for p in _SEPARABLE:
            per_tree[p].append(split[p])
    out = np.zeros(coeffs.shape)
    for p in _SEPARABLE:
        low = expect(coeffs.lowpass[p], levels)
        out += _separable_inverse(per_tree[p], low, fs, p[0], p[1])
    return out * 0.5


def atom(kind, levels, subband, position, shape, part="real"):
    """Unit-norm synthesis atom for one coefficient.

    ``subband`` is a ``(tree, level, orientation)`` key of ``forward``'s
    output, ``position`` a ``(row, col)`` inside that subband. For complex
    subbands ``part="imag"`` places ``1j`` instead of ``1``.
    """
    kind = TransformKind.parse(kind)
    check_layout(tuple(shape), levels)
    coeffs = zero_coeffs(kind, shape, levels)
    sb = coeffs[subband]
    r, c = position
    if not (0 <= r < sb.data.shape[0] and 0 <= c < sb.data.shape[1]):
        raise SubbandError(f"position {position} outside subband of shape {sb.data.shape}")
    sb.data[r, c] = 1j if part == "imag" else 1.0
    a = inverse(coeffs)
    return a / np.linalg.norm(a)


def zero_coeffs(kind, shape, levels):
    """All-zero coefficients with the layout ``forward`` would produce."""
    kind = TransformKind.parse(kind)
    check_layout(tuple(shape), levels)
    dtype = np.complex128 if kind.complex_valued else np.float64
    h, w = shape
    subbands = []
    for level in range(1, levels + 1):
        sub = (h // 2 ** level, w // 2 ** level)
        for orient in orientations(kind):
            for tree in stored_trees(kind):
                subbands.append(Subband(tree, level, orient, np.zeros(sub, dtype)))
    trees = _SEPARABLE if kind.dual_tree else ("a",)
    low = {t: np.zeros((h // 2 ** levels, w // 2 ** levels)) for t in trees}
    return WaveletCoeffs(kind, levels, (h, w), subbands, low)


# -- 1-D helpers (tests and filter diagnostics) -------------------------------

def synthesize_1d(kind, tree, level, n, band=1, position=0):
    """1-D single-tree synthesis of a delta at ``(level, band, position)``.

    ``band=0`` gives the scaling function at that level, ``band>=1`` a
    wavelet. Returns a length-``n`` signal.
    """
    kind = TransformKind.parse(kind)
    fs = builtin_filters(kind)
    bank = fs.bank(level, tree)
    stack = np.zeros((bank.shape[0], 1, n // 2 ** level))
    stack[band, 0, position] = 1.0
    current = _accel.synthesis_rows(stack, bank, 2 * stack.shape[2])
    for lv in range(level - 1, 0, -1):
        bank = fs.bank(lv, tree)
        stack = np.zeros((bank.shape[0],) + current.shape)
        stack[0] = current
        current = _accel.synthesis_rows(stack, bank, 2 * current.shape[1])
    return current[0]
