"""Overcomplete wavelet frames for compressed-sensing image recovery."""

from .errors import (DimensionError, DivergenceError, DomainError, FormatError,
                     OversparseError, SubbandError)
from .transforms import TransformKind, WaveletCoeffs, forward, inverse, atom, coefficient_count
from .sensing import Domain, SamplingMask, make_mask, sense
from .coherence import estimate_coherence_mc, estimate_rip, mutual_coherence_exact
from .recon import ReconParams, ReconResult, pocs_reconstruct
from .metrics import rms_error, snr_db

__version__ = "0.1.0"

__all__ = [
    "TransformKind", "WaveletCoeffs", "forward", "inverse", "atom", "coefficient_count",
    "Domain", "SamplingMask", "make_mask", "sense",
    "estimate_coherence_mc", "estimate_rip", "mutual_coherence_exact",
    "ReconParams", "ReconResult", "pocs_reconstruct", "rms_error", "snr_db",
    "OversparseError", "DimensionError", "SubbandError", "DomainError",
    "DivergenceError", "FormatError",
]
