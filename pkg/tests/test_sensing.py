import numpy as np
import pytest
from hypothesis import given, strategies as st

from oversparse import Domain, make_mask, sense
from oversparse.errors import DimensionError, DomainError, FormatError
from oversparse.sensing import (dft2, idft2, kept_count, read_mask, read_raw, write_mask,
                                write_raw)


@given(w=st.sampled_from([4, 8, 16, 32]), h=st.sampled_from([4, 8, 16]),
       ratio=st.floats(0.05, 1.0), seed=st.integers(0, 2 ** 31),
       scheme=st.sampled_from(["uniform", "variable-density"]))
def test_mask_keeps_exact_count_and_dc(w, h, ratio, seed, scheme):
    m = make_mask(w, h, ratio, Domain.FREQUENCY, scheme, seed)
    assert m.kept.shape == (h, w)
    assert m.count == kept_count(w, h, ratio)
    if m.count:
        assert m.kept[0, 0]


def test_kept_count_rounds_half_up():
    assert kept_count(2, 1, 0.25) == 1
    assert kept_count(4, 4, 0.5) == 8


def test_mask_is_deterministic_and_seed_sensitive():
    a = make_mask(64, 64, 0.3, seed=5)
    b = make_mask(64, 64, 0.3, seed=5)
    c = make_mask(64, 64, 0.3, seed=6)
    np.testing.assert_array_equal(a.kept, b.kept)
    assert not np.array_equal(a.kept, c.kept)


def test_physical_mask_is_uniform_permutation():
    m = make_mask(32, 32, 0.8, Domain.PHYSICAL, seed=1)
    assert m.count == 819


def test_variable_density_prefers_low_frequencies():
    m = make_mask(64, 64, 0.3, scheme="variable-density", seed=2)
    f = np.abs(np.fft.fftfreq(64))
    low = (f[:, None] < 0.15) & (f[None, :] < 0.15)
    assert m.kept[low].mean() > 2 * m.kept[~low].mean()


def test_mask_errors():
    with pytest.raises(DomainError):
        make_mask(8, 8, 0.5, Domain.PHYSICAL, "variable-density")
    for bad in (0.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            make_mask(8, 8, bad)
    with pytest.raises(ValueError):
        make_mask(8, 8, 0.5, scheme="radial")


def test_full_frequency_sampling_keeps_spectrum(rng):
    x = rng.standard_normal((8, 8))
    y = sense(x, make_mask(8, 8, 1.0))
    np.testing.assert_allclose(idft2(y.values).real, x, atol=1e-12)


def test_physical_sampling_zero_fills(rng):
    x = rng.standard_normal((8, 8)) + 5
    m = make_mask(8, 8, 0.5, Domain.PHYSICAL, seed=3)
    y = sense(x, m)
    assert np.all(y.values[~m.kept] == 0)
    np.testing.assert_array_equal(y.values[m.kept], x[m.kept])


def test_unitary_dft_is_parseval(rng):
    x = rng.standard_normal((16, 8))
    assert np.sum(np.abs(dft2(x)) ** 2) == pytest.approx(np.sum(x ** 2))
    assert dft2(np.ones((4, 4)))[0, 0] == pytest.approx(4.0)


@pytest.mark.parametrize("domain", list(Domain))
def test_noise_level(domain):
    x = np.zeros((128, 128))
    m = make_mask(128, 128, 0.5, domain, seed=0)
    y = sense(x, m, sigma=0.1, seed=4)
    v = y.values[m.kept]
    parts = np.concatenate([v.real, v.imag]) if domain is Domain.FREQUENCY else v
    assert np.std(parts) == pytest.approx(0.1, rel=0.05)
    again = sense(x, m, sigma=0.1, seed=4)
    np.testing.assert_array_equal(y.values, again.values)


def test_sensing_errors():
    m = make_mask(8, 8, 0.5)
    with pytest.raises(DimensionError):
        sense(np.zeros((8, 16)), m)
    from oversparse.sensing import sense_physical
    with pytest.raises(DomainError):
        sense_physical(np.zeros((8, 8)), m)


def test_mask_file_round_trip(tmp_path):
    m = make_mask(48, 16, 0.4, seed=9)
    p = tmp_path / "m.pbm"
    write_mask(p, m)
    assert max(len(line) for line in p.read_text().splitlines()) <= 70
    back = read_mask(p)
    np.testing.assert_array_equal(back.kept, m.kept)
    assert (back.domain, back.ratio, back.seed) == (m.domain, m.ratio, m.seed)


def test_bad_mask_file(tmp_path):
    p = tmp_path / "m.pbm"
    p.write_text("P1\n2 2\n0 1 1\n")
    with pytest.raises(FormatError):
        read_mask(p)
    p.write_text("P4\n")
    with pytest.raises(FormatError):
        read_mask(p)


def test_raw_round_trip(tmp_path, rng):
    for values in (rng.standard_normal((4, 6)), rng.standard_normal((3, 5)) + 1j):
        p = tmp_path / "g.raw"
        write_raw(p, values, frequency=True)
        back, flags = read_raw(p)
        np.testing.assert_array_equal(back, values)
        assert flags & 2


def test_truncated_raw_names_offset(tmp_path):
    p = tmp_path / "g.raw"
    write_raw(p, np.ones((4, 4)))
    data = p.read_bytes()
    p.write_bytes(data[:-5])
    with pytest.raises(FormatError, match=f"byte offset {len(data) - 5}"):
        read_raw(p)
    p.write_bytes(data[:10])
    with pytest.raises(FormatError, match="byte offset 10"):
        read_raw(p)
    p.write_bytes(b"NOTRAW!!" + data[8:])
    with pytest.raises(FormatError, match="magic"):
        read_raw(p)
