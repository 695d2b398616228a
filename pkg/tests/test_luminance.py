import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from reliefkit.luminance import (
    GrayImage, PnmHeaderError, PnmMagicError, PnmMaxvalError, PnmSampleError,
    PnmTruncatedError, RgbImage, encode_pnm, load_pnm, rgb_to_luminance, stats,
)


def test_p2_extremal_samples():
    img = load_pnm(b"P2 2 2 255\n0 255\n255 0\n")
    assert isinstance(img, GrayImage)
    np.testing.assert_array_equal(img.values, [[0, 1], [1, 0]])


def test_p6_single_white_pixel():
    img = load_pnm(b"P6 1 1 255\n\xff\xff\xff")
    assert isinstance(img, RgbImage)
    assert (img.width, img.height, img.maxval) == (1, 1, 255)
    np.testing.assert_array_equal(img.pixels, [[[255, 255, 255]]])


def test_p5_truncated():
    with pytest.raises(PnmTruncatedError) as exc:
        load_pnm(b"P5 3 2 255\n" + bytes(5))
    assert exc.value.offset == 16


def test_ascii_truncated_reports_offset():
    data = b"P2 2 2 255\n0 1 2"
    with pytest.raises(PnmTruncatedError) as exc:
        load_pnm(data)
    assert exc.value.offset == len(data)


@pytest.mark.parametrize("data, err, offset", [
    (b"P4 1 1\n\x00", PnmMagicError, 0),
    (b"", PnmMagicError, 0),
    (b"P2 x 1 255\n0", PnmHeaderError, 3),
    (b"P2 1", PnmHeaderError, 4),
    (b"P2 1 1 0\n0", PnmMaxvalError, 7),
    (b"P5 1 1 70000\n\x00\x00", PnmMaxvalError, 7),
    (b"P2 1 1 10\n11", PnmSampleError, 10),
    (b"P5 1 1 10\n\x0b", PnmSampleError, 10),
    (b"P5 1 1 255", PnmHeaderError, 10),
    (b"P2 0 1 255\n", PnmHeaderError, 6),
])
def test_errors_are_distinct(data, err, offset):
    with pytest.raises(err) as exc:
        load_pnm(data)
    assert exc.value.offset == offset


def test_comments_in_header():
    data = b"P2 # comment\n# another\n2 # w\n1\n#maxval next\n4\n0 4\n"
    np.testing.assert_array_equal(load_pnm(data).values, [[0, 1]])


def test_sixteen_bit_big_endian():
    img = load_pnm(b"P5 2 1 65535\n" + bytes([0xFF, 0xFF, 0x80, 0x00]))
    np.testing.assert_allclose(img.values, [[1.0, 0x8000 / 65535]])


def test_luminance_examples():
    px = np.array([[[255, 255, 255], [0, 0, 0], [255, 0, 0]]])
    y = rgb_to_luminance(RgbImage(px)).values[0]
    assert y[0] == 1.0
    assert y[1] == 0.0
    assert y[2] == pytest.approx(0.299, abs=1e-12)


@given(st.integers(1, 65535).flatmap(lambda mv: st.tuples(st.just(mv), st.integers(0, mv))))
def test_gray_maps_exactly(mv_v):
    maxval, v = mv_v
    y = rgb_to_luminance(RgbImage(np.full((1, 1, 3), v), maxval)).values[0, 0]
    assert y == v / maxval


@given(st.lists(st.integers(0, 255), min_size=3, max_size=3), st.integers(0, 2),
       st.integers(1, 255))
def test_luminance_monotone(rgb, channel, bump):
    lo = np.array(rgb)
    hi = lo.copy()
    hi[channel] = min(255, hi[channel] + bump)
    y_lo = rgb_to_luminance(RgbImage(lo.reshape(1, 1, 3))).values[0, 0]
    y_hi = rgb_to_luminance(RgbImage(hi.reshape(1, 1, 3))).values[0, 0]
    assert y_hi >= y_lo
    assert 0.0 <= y_lo <= 1.0


@settings(max_examples=50)
@given(arrays(np.int64, st.tuples(st.integers(1, 6), st.integers(1, 6), st.just(3)),
              elements=st.integers(0, 1000)))
def test_p3_and_p6_agree(px):
    img = RgbImage(px, maxval=1000)
    a = rgb_to_luminance(load_pnm(encode_pnm(img, binary=False))).values
    b = rgb_to_luminance(load_pnm(encode_pnm(img, binary=True))).values
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(load_pnm(encode_pnm(img)).pixels, px)


@settings(max_examples=50)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)),
              elements=st.floats(0, 1)),
       st.sampled_from([1, 15, 255, 1023, 65535]), st.booleans())
def test_gray_round_trip_within_quantization(values, maxval, binary):
    back = load_pnm(encode_pnm(GrayImage(values), binary=binary, maxval=maxval)).values
    assert np.max(np.abs(back - values)) <= 1 / maxval


def test_stats():
    assert stats(GrayImage([[0, 1], [1, 0]])) == (0, 1, 0.5)
    lo, hi, mean = stats(GrayImage(np.full((3, 4), 0.3)))
    assert lo == hi == 0.3 and mean == pytest.approx(0.3, abs=1e-15)
    lo, hi, mean = stats(GrayImage([[0.2, 0.4]]))
    assert (lo, hi) == (0.2, 0.4) and mean == pytest.approx(0.3, abs=1e-15)
    with pytest.raises(ValueError):
        stats(GrayImage(np.zeros((0, 0))))


def test_gray_image_rejects_out_of_range():
    with pytest.raises(ValueError):
        GrayImage([[1.5]])
    with pytest.raises(ValueError):
        RgbImage(np.full((1, 1, 3), 300), maxval=255)
