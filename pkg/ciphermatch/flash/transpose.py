"""
Conversion between horizontal words and the vertical bit-plane layout.

A horizontal page has one word per row with bit k in column k. Its
transpose holds bit-plane k on row k, which is what one wordline stores
when every bitline carries one word.
"""

import numpy as np

from ciphermatch.core.errors import LayoutError

PAGE_BYTES = 4096
WORD_BITS = 32
PAGE_BITS = PAGE_BYTES * 8
PAGE_WORDS = PAGE_BITS // WORD_BITS


def words_to_horizontal(words: np.ndarray, width: int) -> np.ndarray:
    values = np.asarray(words, dtype=np.uint64)
    if values.ndim != 1:
        raise LayoutError(f"expected a flat word vector, got shape {values.shape}")

    if values.size and int(values.max()) >> width:
        raise LayoutError(f"word value exceeds {width} bits")

    return ((values[:, None] >> np.arange(width, dtype=np.uint64)) & np.uint64(1)).astype(bool)


def horizontal_to_words(page: np.ndarray) -> np.ndarray:
    weights = np.uint64(1) << np.arange(page.shape[1], dtype=np.uint64)
    return (page.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)


def transpose_bits(matrix: np.ndarray) -> np.ndarray:
    if matrix.ndim != 2:
        raise LayoutError(f"expected a two-dimensional bit matrix, got shape {matrix.shape}")
    return np.ascontiguousarray(matrix.T)


def transpose_page(page: np.ndarray) -> np.ndarray:
    """Swap bit (r, c) with bit (c, r) on one 4 KB page; applying it twice is the identity."""
    if page.ndim != 2 or page.size != PAGE_BITS:
        raise LayoutError(f"a page holds {PAGE_BITS} bits, got shape {page.shape}")
    return transpose_bits(page)


def page_from_bytes(data: bytes) -> np.ndarray:
    """4096 bytes of little-endian 32-bit words to a (1024, 32) horizontal page."""
    if len(data) != PAGE_BYTES:
        raise LayoutError(f"a page is {PAGE_BYTES} bytes, got {len(data)}")
    return words_to_horizontal(np.frombuffer(data, dtype="<u4"), WORD_BITS)


def page_to_bytes(page: np.ndarray) -> bytes:
    if page.shape != (PAGE_WORDS, WORD_BITS):
        raise LayoutError(f"a horizontal page has shape {(PAGE_WORDS, WORD_BITS)}, got {page.shape}")
    return horizontal_to_words(page).astype("<u4").tobytes()
