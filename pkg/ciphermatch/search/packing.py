"""
Bitstring packing: t_bits-wide chunks, n chunks per plaintext polynomial.

The first bit of a string is the most significant bit of chunk 0, and the
final chunk is zero-padded on the low side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ciphermatch.core.errors import PackingError
from ciphermatch.he.ring_core import PolyT
from ciphermatch.models.he_params import HeParams
from ciphermatch.utils.helpers import encode_dna, parse_bit_text


@dataclass(slots=True, frozen=True, eq=False)
class BitString:
    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.bits)
        if arr.ndim != 1 or arr.size == 0:
            raise PackingError("bit string must be a non-empty one-dimensional sequence")

        if np.any((arr != 0) & (arr != 1)):
            raise PackingError("bit string may only hold 0 and 1")

        arr = arr.astype(np.uint8, copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @classmethod
    def from_text(cls, text: str) -> BitString:
        return cls(parse_bit_text(text))

    @classmethod
    def from_dna(cls, text: str) -> BitString:
        return cls(encode_dna(text))

    @classmethod
    def from_bytes(cls, data: bytes, bit_len: int | None = None) -> BitString:
        """Most significant bit of each byte first; optionally truncated to bit_len."""
        if not data:
            raise PackingError("input is empty")

        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if bit_len is not None:
            if not 1 <= bit_len <= bits.size:
                raise PackingError(f"bit length {bit_len} outside [1, {bits.size}]")
            bits = bits[:bit_len]

        return cls(bits)

    def to_bytes(self) -> bytes:
        return np.packbits(self.bits).tobytes()

    def to_text(self) -> str:
        return (self.bits + ord("0")).tobytes().decode("ascii")

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


@dataclass(slots=True, frozen=True, eq=False)
class PackedMessage:
    chunks: np.ndarray
    original_bit_len: int
    t_bits: int

    def __post_init__(self) -> None:
        expected = math.ceil(self.original_bit_len / self.t_bits)
        if self.original_bit_len < 1 or len(self.chunks) != expected:
            raise PackingError(f"{len(self.chunks)} chunks do not fit a bit length of {self.original_bit_len}")

        if len(self.chunks) and int(np.max(self.chunks)) >> self.t_bits:
            raise PackingError(f"chunk value exceeds {self.t_bits} bits")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PackedMessage):
            return NotImplemented
        return (
            self.original_bit_len == other.original_bit_len
            and self.t_bits == other.t_bits
            and np.array_equal(self.chunks, other.chunks)
        )


@dataclass(slots=True, frozen=True)
class FootprintReport:
    bit_len: int
    plain_bytes: float
    polynomials: int
    encrypted_bytes: int
    expansion_factor: float
    single_bit_polynomials: int

    def as_dict(self) -> dict[str, int | float]:
        return {
            "bit_len": self.bit_len,
            "plain_bytes": self.plain_bytes,
            "polynomials": self.polynomials,
            "encrypted_bytes": self.encrypted_bytes,
            "expansion_factor": self.expansion_factor,
            "single_bit_polynomials": self.single_bit_polynomials,
        }


def chunk_count(bit_len: int, params: HeParams) -> int:
    return math.ceil(bit_len / params.t_bits)


def polynomial_count(bit_len: int, params: HeParams) -> int:
    return math.ceil(chunk_count(bit_len, params) / params.n)


def _bits_to_words(bits: np.ndarray, width: int) -> np.ndarray:
    padded = np.zeros(math.ceil(bits.size / width) * width, dtype=np.uint64)
    padded[: bits.size] = bits
    weights = np.uint64(1) << np.arange(width - 1, -1, -1, dtype=np.uint64)
    return (padded.reshape(-1, width) * weights).sum(axis=1, dtype=np.uint64)


def _words_to_bits(words: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1, dtype=np.uint64)
    return ((np.asarray(words, dtype=np.uint64)[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).reshape(-1)


def pack(bits: BitString, params: HeParams) -> PackedMessage:
    return PackedMessage(_bits_to_words(bits.bits, params.t_bits), len(bits), params.t_bits)


def to_plaintexts(pm: PackedMessage, params: HeParams) -> list[PolyT]:
    if pm.t_bits != params.t_bits:
        raise PackingError(f"message packed with t_bits={pm.t_bits}, params use {params.t_bits}")

    count = math.ceil(len(pm.chunks) / params.n)
    coeffs = np.zeros(count * params.n, dtype=np.uint64)
    coeffs[: len(pm.chunks)] = pm.chunks

    return [PolyT(row, params) for row in coeffs.reshape(count, params.n)]


def unpack(plaintexts: Sequence[PolyT], original_bit_len: int, params: HeParams) -> BitString:
    if original_bit_len < 1:
        raise PackingError(f"bit length must be positive, got {original_bit_len}")

    expected = polynomial_count(original_bit_len, params)
    if len(plaintexts) != expected:
        raise PackingError(f"bit length {original_bit_len} needs {expected} polynomials, got {len(plaintexts)}")

    chunks = np.concatenate([p.coeffs for p in plaintexts])[: chunk_count(original_bit_len, params)]
    return BitString(_words_to_bits(chunks, params.t_bits)[:original_bit_len])


def negate_bits(bits: BitString) -> BitString:
    return BitString(bits.bits ^ np.uint8(1))


def footprint_report(bits: BitString, params: HeParams) -> FootprintReport:
    k = len(bits)
    polys = polynomial_count(k, params)
    plain_bytes = k / 8
    encrypted_bytes = polys * 2 * params.n * params.q_bits // 8

    return FootprintReport(
        bit_len=k,
        plain_bytes=plain_bytes,
        polynomials=polys,
        encrypted_bytes=encrypted_bytes,
        expansion_factor=encrypted_bytes / plain_bytes,
        # one data bit per coefficient
        single_bit_polynomials=math.ceil(k / params.n),
    )
