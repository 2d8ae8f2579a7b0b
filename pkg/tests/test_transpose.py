import numpy as np
import pytest

from ciphermatch.core.errors import LayoutError
from ciphermatch.flash.transpose import (
    PAGE_BYTES,
    PAGE_WORDS,
    WORD_BITS,
    horizontal_to_words,
    page_from_bytes,
    page_to_bytes,
    transpose_bits,
    transpose_page,
    words_to_horizontal,
)


def test_horizontal_layout_puts_lsb_in_column_zero():
    page = words_to_horizontal(np.array([0b1011], dtype=np.uint64), 4)
    assert page.tolist() == [[True, True, False, True]]


def test_words_survive_the_horizontal_layout(rng):
    words = rng.integers(0, 1 << 32, size=100, dtype=np.uint64)
    assert horizontal_to_words(words_to_horizontal(words, 32)).tolist() == words.tolist()


def test_transposed_page_holds_one_bit_plane_per_row(rng):
    words = rng.integers(0, 1 << 32, size=PAGE_WORDS, dtype=np.uint64)
    vertical = transpose_page(words_to_horizontal(words, WORD_BITS))

    assert vertical.shape == (WORD_BITS, PAGE_WORDS)
    assert vertical[5].tolist() == [bool((int(w) >> 5) & 1) for w in words]


def test_transposing_twice_is_the_identity(rng):
    page = rng.integers(0, 2, size=(PAGE_WORDS, WORD_BITS)).astype(bool)
    assert np.array_equal(transpose_page(transpose_page(page)), page)


def test_page_bytes_round_trip(rng):
    data = rng.integers(0, 256, size=PAGE_BYTES, dtype=np.uint8).tobytes()
    assert page_to_bytes(page_from_bytes(data)) == data


def test_first_word_is_little_endian():
    data = bytes([1, 0, 0, 0]) + bytes(PAGE_BYTES - 4)
    page = page_from_bytes(data)

    assert page[0, 0]
    assert not page[0, 1:].any()


def test_shape_violations_are_rejected():
    with pytest.raises(LayoutError):
        transpose_page(np.zeros((10, 10), dtype=bool))
    with pytest.raises(LayoutError):
        transpose_bits(np.zeros(8, dtype=bool))
    with pytest.raises(LayoutError):
        page_from_bytes(bytes(100))
    with pytest.raises(LayoutError):
        words_to_horizontal(np.array([16], dtype=np.uint64), 4)


@pytest.mark.acceptance
def test_random_pages_transpose_and_round_trip():
    rng = np.random.default_rng(9)
    weights = np.uint64(1) << np.arange(WORD_BITS, dtype=np.uint64)

    for _ in range(1000):
        data = rng.integers(0, 256, size=PAGE_BYTES, dtype=np.uint8).tobytes()
        page = page_from_bytes(data)
        vertical = transpose_page(page)

        assert np.array_equal(transpose_page(vertical), page)
        assert page_to_bytes(page) == data
        words = np.frombuffer(data, dtype="<u4").astype(np.uint64)
        assert np.array_equal((vertical.astype(np.uint64) * weights[:, None]).sum(axis=0, dtype=np.uint64), words)
