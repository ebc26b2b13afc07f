import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from fftsvd import textio
from fftsvd.errors import ParseError, UsageError
from fftsvd.pgm import Image, format_pgm, parse_pgm, read_pgm, write_pgm

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


# PGM


@pytest.mark.parametrize("binary", [True, False])
def test_pgm_round_trip(binary, tmp_path, rng):
    levels = rng.integers(0, 256, (5, 7))
    img = Image.from_levels(levels)
    path = tmp_path / "x.pgm"
    write_pgm(path, img, binary=binary)
    back = read_pgm(path)
    assert np.array_equal(back.to_levels(), levels)
    assert np.array_equal(back.pixels, levels / 255)
    assert path.read_bytes()[:2] == (b"P5" if binary else b"P2")


def test_pgm_header_comments_and_maxval():
    img = parse_pgm(b"P2\n# comment\n2 1 # trailing\n# more\n15\n0 15\n")
    assert img.shape == (1, 2) and list(img.pixels[0]) == [0.0, 1.0]


def test_pgm_sixteen_bit_binary():
    raw = np.array([[0, 1000], [65535, 300]], dtype=">u2").tobytes()
    img = parse_pgm(b"P5 2 2 65535\n" + raw)
    assert img.pixels[1, 0] == 1.0 and img.pixels[0, 1] == 1000 / 65535


def test_pgm_writer_clamps_and_rounds():
    img = Image(np.array([[-0.2, 0.5, 1.7]]))
    assert list(parse_pgm(format_pgm(img)).to_levels()[0]) == [0, 128, 255]


@pytest.mark.parametrize(
    "data",
    [b"P6\n1 1\n255\n\x00", b"P5\n2 2\n255\n\x00", b"P2\n1 1\n255\n300\n", b"P2\n2 1\n255\n1 x\n", b"P2\n1", b"P5 0 1 255\n"],
)
def test_pgm_malformed(data):
    with pytest.raises(ParseError):
        parse_pgm(data)


def test_image_validation():
    with pytest.raises(UsageError):
        Image(np.ones(3))
    with pytest.raises(UsageError):
        Image(np.array([[np.nan]]))


# matrix and vector text files


def test_matrix_examples():
    a = textio.parse_matrix("2 3\n1 2 3\n4 5 6\n")
    assert a.shape == (2, 3) and a[1, 2] == 6
    assert textio.format_matrix(np.diag([3.0, 2.5])) == "2 2\n3 0\n0 2.5\n"
    for bad in ("", "2", "2 2\n1 2 3", "0 3\n", "2 x\n1 2", "1 1\nnan", "1 1\nabc"):
        with pytest.raises(ParseError):
            textio.parse_matrix(bad)


def test_vector_examples():
    v = textio.parse_vector("3\n1 0\n2.5\n-1 -2\n")
    assert list(v) == [1, 2.5, -1 - 2j]
    assert textio.format_vector([1, 1j]) == "2\n1 0\n0 1\n"
    assert textio.format_reals([3.0, 2.0]) == "2\n3\n2\n"
    for bad in ("", "2\n1 0\n", "1 2\n3\n", "1\n1 2 3\n", "-1\n"):
        with pytest.raises(ParseError):
            textio.parse_vector(bad)


@given(hnp.arrays(float, hnp.array_shapes(min_dims=2, max_dims=2, max_side=6), elements=finite))
def test_matrix_round_trip_exact(a):
    assert np.array_equal(textio.parse_matrix(textio.format_matrix(a)), a)


@given(st.lists(st.complex_numbers(allow_nan=False, allow_infinity=False), max_size=20))
def test_vector_round_trip_exact(zs):
    v = np.array(zs, dtype=complex)
    assert np.array_equal(textio.parse_vector(textio.format_vector(v)), v)


def test_file_helpers(tmp_path, capsys):
    p = tmp_path / "m.txt"
    textio.write_matrix(p, [[1.5, -2.0]])
    assert textio.read_matrix(p).tolist() == [[1.5, -2.0]]
    textio.write_vector("-", [2j])
    assert capsys.readouterr().out == "1\n0 2\n"
