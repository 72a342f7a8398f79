"""Mutual coherence and restricted-isometry probes.

``estimate_coherence_mc`` samples batches of dictionary atoms, measures them
through the masked unitary DFT, normalises the measured columns and records
the largest off-diagonal magnitude of each batch Gram matrix.

Two evaluation routes give identical numbers:

* ``direct`` synthesises every atom with :func:`transforms.atom`, applies
  ``R F`` and forms the Gram matrix explicitly;
* ``fft`` (default) uses the shift structure of periodic frames: an atom at
  position ``p`` of a level-``j`` subband is its prototype circularly shifted
  by ``2**j * p``, so each Gram entry is a lookup into the masked
  cross-power spectrum of two prototypes, evaluated at the shift difference.
"""

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .errors import DimensionError, DomainError, OversparseError
from .sensing import Domain, dft2, rng_for
from .transforms import TransformKind, atom, hh_orientations, orientations, stored_trees

EXACT_MAX_N = 4096
RIP_EXHAUSTIVE_MAX = 200_000
DEFAULT_BATCH = 16


def _unit_columns(m):
    m = np.asarray(m)
    norms = np.linalg.norm(m, axis=0)
    if np.any(norms == 0):
        raise ValueError("zero column")
    return m / norms


def mutual_coherence_exact(phi, psi):
    """``sqrt(N) * max |<phi_k, psi_j>|`` over unit-normalised columns.

    Brute-force oracle, limited to ``N <= EXACT_MAX_N``. Note the ``sqrt(N)``
    factor: orthobasis pairs score in ``[1, sqrt(N)]``, unlike the
    ``[0, 1]`` Gram scale of :func:`estimate_coherence_mc`.
    """
    phi, psi = np.asarray(phi), np.asarray(psi)
    if phi.ndim != 2 or psi.ndim != 2 or phi.shape[0] != psi.shape[0]:
        raise DimensionError(f"incompatible bases {phi.shape} and {psi.shape}")
    n = phi.shape[0]
    if n > EXACT_MAX_N:
        raise DimensionError(f"N={n} exceeds exact-coherence limit {EXACT_MAX_N}")
    gram = _unit_columns(phi).conj().T @ _unit_columns(psi)
    return float(np.sqrt(n) * np.max(np.abs(gram)))


@dataclass
class CoherenceEstimate:
    kind: TransformKind
    mask: str
    ratio: float
    trials: int
    batch: int
    seed: int
    values: list
    mu_tilde: float
    rejected: int = 0
    band: str = "hh"

    def csv_row(self):
        return [self.kind.value, self.ratio, self.trials, self.seed, self.mu_tilde]


def candidate_subbands(kind, levels, band="hh"):
    """Subband keys eligible for atom sampling.

    ``hh``: diagonal bands of the finest level (all trees); ``all``: every
    detail subband at every level.
    """
    kind = TransformKind.parse(kind)
    if band == "hh":
        orients, lvls = hh_orientations(kind), [1]
    elif band == "all":
        orients, lvls = orientations(kind), range(1, levels + 1)
    else:
        raise ValueError(f"unknown band selection {band!r}")
    return [(t, lv, o) for lv in lvls for o in orients for t in stored_trees(kind)]


class _AtomIndex:
    """Flat index over (subband, row, col) for the candidate subbands."""

    def __init__(self, keys, shape):
        self.keys = keys
        self.sizes = [(shape[0] >> k[1], shape[1] >> k[1]) for k in keys]
        self.offsets = np.cumsum([0] + [a * b for a, b in self.sizes])

    @property
    def total(self):
        return int(self.offsets[-1])

    def locate(self, flat):
        s = int(np.searchsorted(self.offsets, flat, side="right") - 1)
        r, c = divmod(int(flat - self.offsets[s]), self.sizes[s][1])
        return s, r, c


class _FFTGram:
    def __init__(self, kind, levels, shape, keys, kept):
        self.kind, self.levels, self.shape, self.keys = kind, levels, shape, keys
        self.kept = kept.astype(float)
        self.spectra = [dft2(atom(kind, levels, k, (0, 0), shape)) for k in keys]
        self.norms = np.sqrt([np.sum(self.kept * np.abs(s) ** 2) for s in self.spectra])
        self._cross = {}

    def cross(self, s, t):
        if (s, t) not in self._cross:
            # sum_k kept * conj(S_s) * S_t * exp(-2 pi i k.d / N) at every shift d
            prod = self.kept * np.conj(self.spectra[s]) * self.spectra[t]
            self._cross[(s, t)] = np.fft.fft2(prod) / (self.norms[s] * self.norms[t])
        return self._cross[(s, t)]

    def gram(self, picks):
        m = len(picks)
        g = np.eye(m, dtype=complex)
        for i in range(m):
            si, ri, ci = picks[i]
            for j in range(i + 1, m):
                sj, rj, cj = picks[j]
                lvl_i, lvl_j = self.keys[si][1], self.keys[sj][1]
                dy = (rj << lvl_j) - (ri << lvl_i)
                dx = (cj << lvl_j) - (ci << lvl_i)
                v = self.cross(si, sj)[dy % self.shape[0], dx % self.shape[1]]
                g[i, j], g[j, i] = v, np.conj(v)
        return g


def _direct_columns(kind, levels, shape, keys, kept, picks):
    cols = []
    for s, r, c in picks:
        a = atom(kind, levels, keys[s], (r, c), shape)
        cols.append(dft2(a)[kept])
    return np.stack(cols, axis=1)


def measured_norm_is_zero(norm, scale=1.0):
    return norm <= 1e-12 * scale


def estimate_coherence_mc(kind, levels, shape, mask, trials, seed=0, batch=DEFAULT_BATCH,
                          band="hh", method="fft", picks_override=None):
    """Monte-Carlo estimate of the coherence of ``A = W R F psi^T``.

    Each trial draws ``batch`` distinct atoms (per-trial PCG64 streams
    derived from ``seed``), so trial ``i`` is the same whatever ``trials``
    is. ``picks_override`` (a list of ``(subband_key, row, col)``) replaces
    the random draw with one fixed batch; used for exhaustive checks.
    """
    kind = TransformKind.parse(kind)
    shape = tuple(shape)
    if mask.domain is not Domain.FREQUENCY:
        raise DomainError("coherence estimation needs a frequency-domain mask")
    if mask.kept.shape != shape:
        raise DimensionError(f"mask shape {mask.kept.shape} != image shape {shape}")
    if picks_override is None and trials < 2:
        raise ValueError("need at least 2 trials")
    if method not in ("fft", "direct"):
        raise ValueError(f"unknown method {method!r}")

    if picks_override is not None:
        keys = sorted({tuple(p[0]) for p in picks_override}, key=str)
        fixed = [(keys.index(tuple(k)), r, c) for k, r, c in picks_override]
        batch = len(fixed)
    else:
        keys = candidate_subbands(kind, levels, band)
    index = _AtomIndex(keys, shape)
    if batch < 2 or batch > index.total:
        raise ValueError(f"batch size {batch} outside [2, {index.total}]")
    engine = _FFTGram(kind, levels, shape, keys, mask.kept)
    # the masked column norm depends only on the subband, not the position
    degenerate = {s for s, v in enumerate(engine.norms) if measured_norm_is_zero(v)}
    if len(degenerate) == len(keys):
        raise OversparseError("every candidate atom is annihilated by the mask")

    values, rejected = [], 0
    n_trials = 1 if picks_override is not None else trials
    for t in range(n_trials):
        if picks_override is not None:
            picks = list(fixed)
            if any(p[0] in degenerate for p in picks):
                raise OversparseError("fixed batch contains an atom annihilated by the mask")
        else:
            rng = rng_for(seed, 2, t)
            flat = list(rng.choice(index.total, size=batch, replace=False))
            picks = [index.locate(f) for f in flat]
            redraws = 0
            while True:
                bad = [i for i, p in enumerate(picks) if p[0] in degenerate]
                if not bad:
                    break
                redraws += len(bad)
                rejected += len(bad)
                if redraws > 10 * batch:
                    raise OversparseError("too many zero-norm measured atoms")
                for i in bad:
                    f = int(rng.integers(index.total))
                    while f in flat:
                        f = int(rng.integers(index.total))
                    flat[i] = f
                    picks[i] = index.locate(f)
        if method == "fft":
            gram = engine.gram(picks)
        else:
            cols = _direct_columns(kind, levels, shape, keys, mask.kept, picks)
            cols = cols / np.linalg.norm(cols, axis=0)
            gram = cols.conj().T @ cols
        off = np.abs(gram - np.diag(np.diag(gram)))
        values.append(float(off.max()))
    return CoherenceEstimate(kind, mask.describe(), mask.ratio, n_trials, batch, int(seed),
                             values, max(values), rejected, band)


def explicit_sensing_matrix(kind, levels, shape, mask, keys=None):
    """Explicit ``R F psi^T`` restricted to the atoms of ``keys`` (oracle)."""
    kind = TransformKind.parse(kind)
    keys = keys or candidate_subbands(kind, levels, "hh")
    cols, labels = [], []
    for k in keys:
        h, w = shape[0] >> k[1], shape[1] >> k[1]
        for r in range(h):
            for c in range(w):
                cols.append(dft2(atom(kind, levels, k, (r, c), shape))[mask.kept])
                labels.append((k, r, c))
    return np.stack(cols, axis=1), labels


# -- restricted isometry ------------------------------------------------------

@dataclass
class RipEstimate:
    sparsity: int
    trials: int
    delta: float
    method: str
    worst: tuple = field(default=())


def _delta_of(sub):
    ev = np.linalg.eigvalsh(np.einsum("...mi,...mj->...ij", sub.conj(), sub))
    return np.maximum(1.0 - ev[..., 0], ev[..., -1] - 1.0)


def estimate_rip(A, S, trials=500, method="randomized", seed=0, chunk=4096):
    """Empirical restricted-isometry constant of order ``S``.

    Columns are normalised first. ``exhaustive`` scans all ``C(N, S)``
    supports (refused above ``RIP_EXHAUSTIVE_MAX``); ``randomized`` scans
    ``trials`` random supports and is therefore a lower bound.
    """
    A = _unit_columns(np.asarray(A))
    m, n = A.shape
    if not 1 <= S <= m:
        raise ValueError(f"sparsity S={S} must satisfy 1 <= S <= M={m}")
    if method == "exhaustive":
        total = comb(n, S)
        if total > RIP_EXHAUSTIVE_MAX:
            raise ValueError(f"C({n},{S})={total} exceeds exhaustive bound {RIP_EXHAUSTIVE_MAX}")
        supports = combinations(range(n), S)
        n_sets = total
    elif method == "randomized":
        rng = rng_for(seed, 3)
        supports = (np.sort(rng.choice(n, size=S, replace=False)) for _ in range(trials))
        n_sets = trials
    else:
        raise ValueError(f"unknown method {method!r}")

    best, worst = 0.0, ()
    done = 0
    while done < n_sets:
        block = [tuple(next(supports)) for _ in range(min(chunk, n_sets - done))]
        done += len(block)
        idx = np.array(block)
        deltas = _delta_of(A[:, idx].transpose(1, 0, 2))
        k = int(np.argmax(deltas))
        if deltas[k] > best or not worst:
            best, worst = float(max(deltas[k], 0.0)), block[k]
    return RipEstimate(S, n_sets, best, method, tuple(int(i) for i in worst))
