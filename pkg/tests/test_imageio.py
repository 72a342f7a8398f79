import numpy as np
import pytest

from oversparse.errors import FormatError
from oversparse.fixtures import load_fixture, phantom, sparse_image, texture
from oversparse.imageio import (Image, center_crop_pow2, is_pow2, read_image, read_pgm,
                                write_image, write_pgm)


def test_pgm_8bit_round_trip(tmp_path, rng):
    pix = rng.integers(0, 256, (5, 7)).astype(float)
    p = tmp_path / "a.pgm"
    write_pgm(p, pix)
    img = read_pgm(p)
    np.testing.assert_array_equal(img.pixels, pix)
    assert img.scale == "8bit" and (img.height, img.width) == (5, 7)
    assert p.read_bytes().startswith(b"P5\n7 5\n255\n")


def test_pgm_16bit_is_big_endian_and_exact(tmp_path):
    pix = np.array([[0, 1, 256], [65535, 4660, 300]], dtype=float)
    p = tmp_path / "b.pgm"
    write_pgm(p, pix, maxval=65535)
    data = p.read_bytes()
    assert data.endswith(bytes.fromhex("0000 0001 0100 ffff 1234 012c"))
    img = read_image(p)
    np.testing.assert_array_equal(img.pixels, pix)
    assert img.scale == "16bit"


def test_pgm_header_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n2 1\n# depth\n255\n\x01\x02")
    np.testing.assert_array_equal(read_pgm(p).pixels, [[1, 2]])


@pytest.mark.parametrize("data,offset", [
    (b"P5\n4 4\n255\n" + bytes(10), 21),
    (b"P5\n4 4", 6),
    (b"P5\n4 x\n255\n", 5),
])
def test_malformed_pgm_names_offset(tmp_path, data, offset):
    p = tmp_path / "bad.pgm"
    p.write_bytes(data)
    with pytest.raises(FormatError, match=f"byte offset {offset}"):
        read_pgm(p)


def test_not_pgm(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(FormatError):
        read_pgm(p)


def test_write_image_by_extension(tmp_path):
    x = np.linspace(0, 1, 16).reshape(4, 4)
    write_image(tmp_path / "u.raw", Image(x))
    np.testing.assert_array_equal(read_image(tmp_path / "u.raw").pixels, x)
    write_image(tmp_path / "u.pgm", Image(x))
    back = read_image(tmp_path / "u.pgm")
    assert back.scale == "8bit"
    assert np.max(np.abs(back.pixels / 255 - x)) <= 0.5 / 255


def test_crop_and_pow2():
    assert center_crop_pow2(np.zeros((300, 130))).shape == (256, 128)
    assert is_pow2(64) and not is_pow2(96) and not is_pow2(0)


def test_fixtures_are_deterministic_unit_range():
    for name in ("phantom", "texture"):
        a, b = load_fixture(name, 64), load_fixture(name, 64)
        np.testing.assert_array_equal(a, b)
        assert a.min() >= 0 and a.max() <= 1 and a.std() > 0.05
    assert texture(64).max() == 1.0
    assert phantom(32).shape == (32, 32)
    with pytest.raises(ValueError):
        load_fixture("lena")


def test_sparse_image_fixture():
    img, coeffs = sparse_image("dt-complex", n=64, k=10, levels=2, seed=3)
    assert sum(np.count_nonzero(sb.data) for sb in coeffs.subbands) == 10
    again, _ = sparse_image("dt-complex", n=64, k=10, levels=2, seed=3)
    np.testing.assert_array_equal(img, again)
