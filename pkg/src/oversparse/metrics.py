"""RMS error, SNR and convergence-trace summaries.

SNR is ``20 log10(RMS(ref) / RMSE)``: signal RMS over error RMS. With this
definition every row of a results table implies the same reference RMS
(``RMSE * 10**(SNR/20)``), which is how the convention was identified.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

INF_SNR = math.inf


def _pair(ref, rec, ref_scale=None, rec_scale=None):
    ref = np.asarray(ref, dtype=float)
    rec = np.asarray(rec, dtype=float)
    if ref.shape != rec.shape:
        raise DimensionError(f"shape mismatch {ref.shape} vs {rec.shape}")
    if ref_scale is not None and rec_scale is not None and ref_scale != rec_scale:
        raise ValueError(f"scale mismatch {ref_scale!r} vs {rec_scale!r}")
    return ref, rec


def rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


def rms_error(ref, rec, ref_scale=None, rec_scale=None):
    ref, rec = _pair(ref, rec, ref_scale, rec_scale)
    return rms(ref - rec)


def snr_db(ref, rec, ref_scale=None, rec_scale=None):
    ref, rec = _pair(ref, rec, ref_scale, rec_scale)
    err = rms(ref - rec)
    if err == 0:
        return INF_SNR
    return snr_from_rms(rms(ref), err)


def snr_from_rms(ref_rms, err_rms):
    return 20.0 * math.log10(ref_rms / err_rms)


def implied_reference_rms(err_rms, snr):
    """Invert the SNR definition: ``RMS(ref) = RMSE * 10**(SNR / 20)``."""
    return err_rms * 10.0 ** (snr / 20.0)


@dataclass(frozen=True)
class EvalReport:
    rmse: float
    snr_db: float
    scale: str = "unit"


def evaluate(ref, rec, scale="unit"):
    return EvalReport(rms_error(ref, rec), snr_db(ref, rec), scale)


@dataclass(frozen=True)
class TraceSummary:
    knee: int | None  # 1-based; None if the trace never drops below 10*epsilon
    final_change: float
    monotone_after_knee: bool


def trace_summary(trace, epsilon):
    if len(trace) == 0:
        raise ValueError("empty trace")
    knee = next((i + 1 for i, v in enumerate(trace) if v < 10.0 * epsilon), None)
    tail = np.asarray(trace[(knee or 1) - 1:], dtype=float)
    monotone = bool(np.all(np.diff(tail) <= 0)) if knee is not None else False
    return TraceSummary(knee, float(trace[-1]), monotone)


def format_float(x):
    """Shortest round-trip decimal; ``inf``/``-inf``/``nan`` spelled out."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))
