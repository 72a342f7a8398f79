"""Image files: binary PGM (P5, 8/16-bit) and the raw float64 grid format.

The value-range tag follows the file format: 8-bit PGM -> ``"8bit"``
(0..255), 16-bit PGM -> ``"16bit"`` (0..65535), raw float -> ``"unit"``.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .sensing import FLAG_COMPLEX, read_raw, write_raw

SCALES = {"unit": 1.0, "8bit": 255.0, "16bit": 65535.0}


@dataclass(frozen=True)
class Image:
    pixels: np.ndarray
    scale: str = "unit"

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


def _pgm_header(data, path):
    """Parse a P5 header, returning (width, height, maxval, payload offset)."""
    pos, fields = 0, []
    if data[:2] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5) file at byte offset 0")
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise FormatError(f"{path}: truncated header at byte offset {pos}")
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise FormatError(f"{path}: truncated header comment at byte offset {pos}")
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: bad header token at byte offset {start}")
        fields.append(int(data[start:pos]))
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError(f"{path}: missing whitespace after maxval at byte offset {pos}")
    width, height, maxval = fields
    if not 0 < maxval < 65536:
        raise FormatError(f"{path}: maxval {maxval} out of range")
    return width, height, maxval, pos + 1


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    width, height, maxval, offset = _pgm_header(data, path)
    wide = maxval > 255
    need = width * height * (2 if wide else 1)
    if len(data) - offset < need:
        raise FormatError(f"{path}: truncated payload at byte offset {len(data)} "
                          f"(expected {offset + need} bytes)")
    dtype = ">u2" if wide else "u1"
    pix = np.frombuffer(data, dtype=dtype, count=width * height, offset=offset)
    return Image(pix.reshape(height, width).astype(np.float64), "16bit" if wide else "8bit")


def write_pgm(path, pixels, maxval=255):
    pixels = np.asarray(pixels, dtype=np.float64)
    q = np.clip(np.floor(pixels + 0.5), 0, maxval)
    height, width = q.shape
    body = q.astype(">u2" if maxval > 255 else "u1").tobytes()
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        fh.write(body)


def read_image(path):
    """Read a PGM or raw float grid."""
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"P5":
        return read_pgm(path)
    values, flags = read_raw(path)
    if flags & FLAG_COMPLEX:
        raise FormatError(f"{path}: complex grid is not an image")
    return Image(values, "unit")


def write_image(path, img):
    """Write by extension: ``.pgm`` keeps the tag's bit depth, else raw float."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".pgm":
        if img.scale == "unit":
            write_pgm(path, img.pixels * 255.0, 255)
        else:
            write_pgm(path, img.pixels, int(SCALES[img.scale]))
    else:
        write_raw(path, img.pixels)


def center_crop_pow2(pixels):
    """Largest centred power-of-two crop along each axis."""
    h, w = pixels.shape
    th, tw = 1 << (h.bit_length() - 1), 1 << (w.bit_length() - 1)
    top, left = (h - th) // 2, (w - tw) // 2
    return pixels[top:top + th, left:left + tw]


def is_pow2(n):
    return n > 0 and n & (n - 1) == 0
