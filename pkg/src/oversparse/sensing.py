"""Sampling masks, the sensing operators ``R F`` and ``R I``, and measurement
noise.

All randomness comes from numpy's PCG64 bit generator seeded with the
caller's integer seed, so masks and noise are reproducible across platforms
for a given numpy release.
"""

import re
import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, DomainError, FormatError


class Domain(str, Enum):
    FREQUENCY = "frequency"
    PHYSICAL = "physical"


SCHEMES = ("uniform", "variable-density")


def rng_for(seed, *stream):
    """PCG64 generator for ``seed`` and an optional sub-stream path."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *stream])))


def dft2(x):
    """Unitary 2-D DFT, DC at index (0, 0)."""
    return np.fft.fft2(x, norm="ortho")


def idft2(X):
    return np.fft.ifft2(X, norm="ortho")


@dataclass(frozen=True)
class SamplingMask:
    kept: np.ndarray
    domain: Domain
    ratio: float
    seed: int
    scheme: str = "uniform"
    density_exp: float = 2.0

    @property
    def height(self):
        return self.kept.shape[0]

    @property
    def width(self):
        return self.kept.shape[1]

    @property
    def count(self):
        return int(np.count_nonzero(self.kept))

    def describe(self):
        return (f"domain={self.domain.value} ratio={self.ratio:g} "
                f"seed={self.seed} scheme={self.scheme}")


def kept_count(width, height, ratio):
    # round half up; Python's round() is banker's rounding
    return int(np.floor(ratio * width * height + 0.5))


def _radial_density(height, width, exponent):
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    r = np.sqrt(fx ** 2 + fy ** 2) / np.sqrt(0.5)
    return np.clip(1.0 - r, 0.0, 1.0) ** exponent + 1e-6


def make_mask(width, height, ratio, domain=Domain.FREQUENCY, scheme="uniform",
              seed=0, density_exp=2.0):
    """Random binary sampling mask with exactly ``round(ratio*W*H)`` kept.

    ``uniform`` draws kept positions uniformly without replacement; in the
    frequency domain DC is always kept and the other ``k - 1`` positions are
    drawn uniformly from the rest (without DC the image mean is unobservable).
    ``variable-density`` (frequency domain only) weights positions by
    ``(1 - r)**density_exp`` of the normalised radial frequency and always
    keeps DC; weighted sampling without replacement uses exponential keys.
    """
    domain = Domain(domain)
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown mask scheme {scheme!r}")
    if scheme == "variable-density" and domain is Domain.PHYSICAL:
        raise DomainError("variable-density masks are only defined in the frequency domain")
    n = width * height
    k = kept_count(width, height, ratio)
    rng = rng_for(seed, 0)
    kept = np.zeros(n, dtype=bool)
    if scheme == "uniform" and domain is Domain.PHYSICAL:
        kept[rng.permutation(n)[:k]] = True
    elif scheme == "uniform":
        kept[0] = True
        kept[1 + rng.permutation(n - 1)[:k - 1]] = True
    else:
        weights = _radial_density(height, width, density_exp).ravel()
        keys = rng.exponential(size=n) / weights
        keys[0] = -1.0  # DC first
        kept[np.argsort(keys, kind="stable")[:k]] = True
    return SamplingMask(kept.reshape(height, width), domain, float(ratio), int(seed),
                        scheme, float(density_exp))


@dataclass(frozen=True)
class Measurements:
    """Zero-filled measurements; ``values`` is 0 wherever the mask is off."""

    domain: Domain
    values: np.ndarray
    mask: SamplingMask
    sigma: float = 0.0
    seed: int = 0


def _check(img, mask, domain):
    if mask.domain is not domain:
        raise DomainError(f"mask domain is {mask.domain.value}, expected {domain.value}")
    if np.shape(img) != mask.kept.shape:
        raise DimensionError(f"image shape {np.shape(img)} != mask shape {mask.kept.shape}")


def sense_frequency(img, mask, sigma=0.0, seed=0):
    """``y = R F x + noise``: masked unitary spectrum with complex noise."""
    _check(img, mask, Domain.FREQUENCY)
    spec = dft2(np.asarray(img, dtype=np.float64))
    out = np.zeros_like(spec)
    out[mask.kept] = spec[mask.kept]
    if sigma > 0:
        noise = rng_for(seed, 1).standard_normal((2, mask.count)) * sigma
        out[mask.kept] += noise[0] + 1j * noise[1]
    return Measurements(Domain.FREQUENCY, out, mask, float(sigma), int(seed))


def sense_physical(img, mask, sigma=0.0, seed=0):
    """``y = R x + noise``: kept pixels with real Gaussian noise."""
    _check(img, mask, Domain.PHYSICAL)
    x = np.asarray(img, dtype=np.float64)
    out = np.zeros_like(x)
    out[mask.kept] = x[mask.kept]
    if sigma > 0:
        out[mask.kept] += rng_for(seed, 1).standard_normal(mask.count) * sigma
    return Measurements(Domain.PHYSICAL, out, mask, float(sigma), int(seed))


def sense(img, mask, sigma=0.0, seed=0):
    if mask.domain is Domain.FREQUENCY:
        return sense_frequency(img, mask, sigma, seed)
    return sense_physical(img, mask, sigma, seed)


# -- mask files (plain PBM) -----------------------------------------------------

_MASK_META = re.compile(r"(\w+)=(\S+)")


def write_mask(path, mask):
    lines = ["P1", f"# {mask.describe()}", f"{mask.width} {mask.height}"]
    for row in mask.kept.astype(np.uint8):
        text = " ".join(str(v) for v in row)
        # PBM lines should stay under 70 characters
        while len(text) > 70:
            cut = text.rfind(" ", 0, 70)
            lines.append(text[:cut])
            text = text[cut + 1:]
        lines.append(text)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mask(path):
    with open(path, encoding="ascii") as fh:
        text = fh.read()
    meta, tokens = {}, []
    for line in text.splitlines():
        body, _, comment = line.partition("#")
        meta.update(_MASK_META.findall(comment))
        tokens.extend(body.split())
    if not tokens or tokens[0] != "P1":
        raise FormatError(f"{path}: not a plain PBM (P1) file")
    try:
        width, height = int(tokens[1]), int(tokens[2])
    except (IndexError, ValueError):
        raise FormatError(f"{path}: bad PBM header") from None
    bits = "".join(tokens[3:])
    if len(bits) != width * height or set(bits) - {"0", "1"}:
        raise FormatError(f"{path}: expected {width * height} bits, got {len(bits)}")
    kept = (np.frombuffer(bits.encode(), dtype=np.uint8) == ord("1")).reshape(height, width)
    return SamplingMask(kept, Domain(meta.get("domain", "frequency")),
                        float(meta.get("ratio", kept.mean())), int(meta.get("seed", 0)),
                        meta.get("scheme", "uniform"))


# -- raw float grids ----------------------------------------------------------

RAW_MAGIC = b"OVSPRAW1"
FLAG_COMPLEX = 1
FLAG_FREQUENCY = 2
_HEADER = struct.Struct("<8sIIQ")  # 24 bytes: magic, width, height, flags


def write_raw(path, values, frequency=None):
    """Little-endian float64 grid with a 24-byte header.

    Complex grids are stored as interleaved (re, im) pairs.
    """
    values = np.asarray(values)
    height, width = values.shape
    flags = 0
    if np.iscomplexobj(values):
        flags |= FLAG_COMPLEX
        payload = np.empty((height, width, 2), dtype="<f8")
        payload[..., 0], payload[..., 1] = values.real, values.imag
    else:
        payload = values.astype("<f8")
    if frequency:
        flags |= FLAG_FREQUENCY
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(RAW_MAGIC, width, height, flags))
        fh.write(payload.tobytes())


def read_raw(path):
    """Return ``(values, flags)`` from a raw grid file."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header at byte offset {len(data)}")
    magic, width, height, flags = _HEADER.unpack_from(data)
    if magic != RAW_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    per = 2 if flags & FLAG_COMPLEX else 1
    need = _HEADER.size + 8 * per * width * height
    if len(data) < need:
        raise FormatError(f"{path}: truncated payload at byte offset {len(data)}, need {need}")
    arr = np.frombuffer(data, dtype="<f8", count=per * width * height, offset=_HEADER.size)
    if per == 2:
        arr = arr.reshape(height, width, 2)
        values = arr[..., 0] + 1j * arr[..., 1]
    else:
        values = arr.reshape(height, width).astype(np.float64)
    return values, flags


def write_measurements(path, meas):
    write_raw(path, meas.values, frequency=meas.domain is Domain.FREQUENCY)
