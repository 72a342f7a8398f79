"""POCS reconstruction: alternate wavelet soft-thresholding with data
consistency on the sampled entries.

One iteration, for measurement-domain iterate ``X``::

    x  = Re(F^H X)              (frequency data; identity for physical data)
    x  = W^T S_lambda(W x)       (shrink detail coefficients)
    X' = F x                     (identity for physical data)
    X' = Y on kept entries       (data consistency)

and the loop stops once ``||X' - X|| / ||X|| < epsilon``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionError, DivergenceError, DomainError
from .sensing import Domain, dft2, idft2
from .transforms import TransformKind, WaveletCoeffs, check_layout, forward, inverse

DEFAULT_LAMBDA_FRACTION = 0.025
DEFAULT_EPSILON = 1e-3
DEFAULT_MAX_ITER = 100
DEFAULT_DECAY_FINAL = 0.1
SCHEDULES = ("fixed", "linear-decay", "geometric-decay")


def soft_threshold(y, lam):
    """Shrinkage: ``y - lam`` above ``lam``, ``y + lam`` below ``-lam``, else 0."""
    y = np.asarray(y, dtype=float)
    out = np.where(y > lam, y - lam, np.where(y < -lam, y + lam, 0.0))
    return out[()] if out.ndim == 0 else out


def complex_soft_threshold(c, lam):
    """Shrink magnitudes by ``lam``, keep phase; zero when ``|c| <= lam``."""
    mag = np.abs(c)
    scale = np.zeros_like(mag)
    big = mag > lam
    scale[big] = (mag[big] - lam) / mag[big]
    return c * scale


def _shrink(a, lam):
    if np.iscomplexobj(a):
        return complex_soft_threshold(a, lam)
    return soft_threshold(a, lam)


def threshold_coeffs(coeffs: WaveletCoeffs, lam, lowpass=False) -> WaveletCoeffs:
    """Shrink every detail subband; the low-pass residual is left alone
    unless ``lowpass`` is set."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if lam == 0:
        return coeffs.map(np.copy)
    return coeffs.map(lambda a: _shrink(a, lam), lowpass=lowpass)


def data_consistency(current, meas):
    """Take measured values on kept entries, keep ``current`` elsewhere."""
    if np.shape(current) != meas.values.shape:
        raise DimensionError(f"iterate shape {np.shape(current)} != measurement shape "
                             f"{meas.values.shape}")
    return np.where(meas.mask.kept, meas.values, current)


@dataclass
class ReconParams:
    kind: TransformKind = TransformKind.DT_COMPLEX
    levels: int = 3
    lam: float | None = None  # None: DEFAULT_LAMBDA_FRACTION * max detail of the initial estimate
    schedule: str = "fixed"  # or "linear-decay", "geometric-decay"
    decay_final: float = DEFAULT_DECAY_FINAL
    epsilon: float = DEFAULT_EPSILON
    max_iter: int = DEFAULT_MAX_ITER
    domain: Domain = Domain.FREQUENCY
    # shrink the low-pass residual too; off by default, needed when the
    # target is sparse in *every* coefficient (exact-recovery checks)
    threshold_lowpass: bool = False

    def __post_init__(self):
        self.kind = TransformKind.parse(self.kind)
        self.domain = Domain(self.domain)
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown lambda schedule {self.schedule!r}")
        if not 0.0 <= self.decay_final <= 1.0:
            raise ValueError("decay_final must be in [0, 1]")
        if self.schedule == "geometric-decay" and self.decay_final == 0.0:
            raise ValueError("geometric decay needs decay_final > 0")

    def echo(self):
        d = asdict(self)
        d["kind"] = self.kind.value
        d["domain"] = self.domain.value
        return d


@dataclass
class ReconResult:
    image: np.ndarray
    iterations: int
    trace: list
    converged: bool
    params: ReconParams
    lam: float
    rmse_trace: list = field(default_factory=list)
    imag_energy: float = 0.0

    def summary(self):
        return {
            "params": self.params.echo(),
            "lambda": self.lam,
            "iterations": self.iterations,
            "converged": self.converged,
            "final_change": self.trace[-1] if self.trace else None,
            "imag_energy": self.imag_energy,
        }


def _to_image(X, domain):
    if domain is Domain.FREQUENCY:
        return idft2(X).real
    return X


def _to_measurement(x, domain):
    if domain is Domain.FREQUENCY:
        return dft2(x)
    return x


def default_lambda(meas, kind, levels, fraction=DEFAULT_LAMBDA_FRACTION):
    """Threshold scaled to the zero-filled estimate's largest detail coefficient."""
    x0 = _to_image(meas.values, meas.domain)
    return fraction * forward(x0, kind, levels).max_detail()


def lambda_at(lam0, params, i):
    """Threshold at 0-based iteration ``i``; decays reach
    ``decay_final * lam0`` at the last allowed iteration."""
    if params.schedule == "fixed" or params.max_iter == 1:
        return lam0
    frac = i / (params.max_iter - 1)
    if params.schedule == "geometric-decay":
        return lam0 * params.decay_final ** frac
    return lam0 * (1.0 - (1.0 - params.decay_final) * frac)


def shrink_image(x, kind, levels, lam, lowpass=False):
    """``W^T S_lam(W x)`` for a real image."""
    return inverse(threshold_coeffs(forward(x, kind, levels), lam, lowpass))


def pocs_reconstruct(meas, params: ReconParams, reference=None, callback=None) -> ReconResult:
    """Reconstruct an image from zero-filled measurements.

    ``reference`` (optional) adds a per-iteration RMSE trace. ``callback`` is
    called as ``callback(i, X)`` with the measurement-domain iterate after
    each data-consistency step.
    """
    if meas.domain is not params.domain:
        raise DomainError(f"measurement domain {meas.domain.value} != params domain "
                          f"{params.domain.value}")
    check_layout(meas.values.shape, params.levels)
    domain = params.domain
    lam0 = params.lam
    if lam0 is None:
        lam0 = default_lambda(meas, params.kind, params.levels)

    X = meas.values.copy()
    trace, rmse_trace = [], []
    converged = False
    for i in range(params.max_iter):
        lam = lambda_at(lam0, params, i)
        x = shrink_image(_to_image(X, domain), params.kind, params.levels, lam,
                         params.threshold_lowpass)
        X_next = data_consistency(_to_measurement(x, domain), meas)
        if not np.all(np.isfinite(X_next)):
            raise DivergenceError(f"non-finite iterate at iteration {i + 1}")
        norm = np.linalg.norm(X)
        diff = np.linalg.norm(X_next - X)
        change = diff / norm if norm > 0 else (0.0 if diff == 0 else np.inf)
        trace.append(float(change))
        X = X_next
        if callback is not None:
            callback(i, X)
        if reference is not None:
            rmse_trace.append(float(np.sqrt(np.mean((_to_image(X, domain) - reference) ** 2))))
        if change < params.epsilon:
            converged = True
            break

    if domain is Domain.FREQUENCY:
        full = idft2(X)
        image, imag_energy = full.real, float(np.sum(full.imag ** 2))
    else:
        image, imag_energy = X.copy(), 0.0
    return ReconResult(image, len(trace), trace, converged, params, float(lam0),
                       rmse_trace, imag_energy)
