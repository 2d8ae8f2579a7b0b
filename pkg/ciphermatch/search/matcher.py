"""
Addition-only encrypted exact matching.

The query is negated and repeated as one continuous bit stream ~Q ~Q ...;
variant `s` of the prepared query holds stream bits [s, s + n*t_bits).
Adding a database ciphertext to a variant yields an all-ones coefficient
exactly where the database chunk equals the corresponding slice of Q Q ...
A copy of the query that starts at a local bit b = k*p - s (p the cyclic
period of Q) is reported when every coefficient it touches is all-ones.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextvars import copy_context
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ciphermatch.core.errors import DimensionError, MissingInputError, PackingError
from ciphermatch.he.bfv import Ciphertext, EncryptMode, PublicKey, SecretKey, decrypt, encrypt, hom_add, hom_sub
from ciphermatch.he.ring_core import PolyT
from ciphermatch.models.he_params import HeParams
from ciphermatch.models.match_index import MatchIndex
from ciphermatch.search.packing import BitString, negate_bits, pack, polynomial_count, to_plaintexts
from ciphermatch.utils.logger import logger

Adder = Callable[[Ciphertext, Ciphertext], Ciphertext]


class IndexMode(str, Enum):
    CLIENT_DECRYPT = "client-decrypt"
    SUBTRACT = "subtract"


@dataclass(slots=True, frozen=True)
class DatabaseMeta:
    bit_len: int
    ciphertexts: int
    params: HeParams


@dataclass(slots=True, frozen=True)
class QueryMeta:
    shift: int
    query_bit_len: int
    period: int


@dataclass(slots=True, frozen=True)
class EncryptedDatabase:
    cts: tuple[Ciphertext, ...]
    bit_len: int
    params: HeParams

    def __post_init__(self) -> None:
        expected = polynomial_count(self.bit_len, self.params)
        if self.bit_len < 1 or len(self.cts) != expected:
            raise PackingError(f"bit length {self.bit_len} needs {expected} ciphertexts, got {len(self.cts)}")

        for ct in self.cts:
            if ct.params.ring_key() != self.params.ring_key():
                raise DimensionError(f"database ciphertext ring {ct.params.ring_key()} differs from {self.params.ring_key()}")

    @property
    def meta(self) -> DatabaseMeta:
        return DatabaseMeta(self.bit_len, len(self.cts), self.params)


@dataclass(slots=True, frozen=True)
class PreparedQuery:
    shift: int
    ct: Ciphertext
    query_bit_len: int
    period: int

    def __post_init__(self) -> None:
        if not 0 <= self.shift < self.period:
            raise PackingError(f"shift {self.shift} outside [0, {self.period})")

    @property
    def meta(self) -> QueryMeta:
        return QueryMeta(self.shift, self.query_bit_len, self.period)


@dataclass(slots=True, frozen=True)
class MatchPolynomialKit:
    plaintext: PolyT
    ct: Ciphertext


def minimal_period(bits: BitString) -> int:
    """Smallest p dividing len(bits) such that the string equals its rotation by p."""
    y = len(bits)
    for p in range(1, y + 1):
        if y % p == 0 and np.array_equal(bits.bits, np.roll(bits.bits, -p)):
            return p
    return y


def shift_count(query_bits: BitString) -> int:
    return minimal_period(query_bits)


def replicated_pattern(pattern_bits: BitString, shift: int, params: HeParams) -> BitString:
    """Bits [shift, shift + n*t_bits) of the endless repetition of `pattern_bits`."""
    positions = (shift + np.arange(params.plaintext_bits)) % len(pattern_bits)
    return BitString(pattern_bits.bits[positions])


def _check_query(query_bits: BitString, params: HeParams) -> None:
    if len(query_bits) > params.plaintext_bits:
        raise PackingError(f"query of {len(query_bits)} bits exceeds one polynomial ({params.plaintext_bits} bits)")


def prepare_database(
    bits: BitString,
    pk: PublicKey,
    params: HeParams,
    rng: np.random.Generator,
    mode: EncryptMode = EncryptMode.STANDARD,
) -> EncryptedDatabase:
    plaintexts = to_plaintexts(pack(bits, params), params)
    logger.debug(f"prepare_database: {len(bits)} bits into {len(plaintexts)} ciphertexts")

    return EncryptedDatabase(tuple(encrypt(m, pk, rng, mode) for m in plaintexts), len(bits), params)


def prepare_query(
    query_bits: BitString,
    pk: PublicKey,
    params: HeParams,
    rng: np.random.Generator,
    mode: EncryptMode = EncryptMode.STANDARD,
) -> list[PreparedQuery]:
    _check_query(query_bits, params)

    negated = negate_bits(query_bits)
    period = shift_count(query_bits)
    logger.debug(f"prepare_query: {len(query_bits)}-bit query, period {period}")

    prepared: list[PreparedQuery] = []
    for shift in range(period):
        (plaintext,) = to_plaintexts(pack(replicated_pattern(negated, shift, params), params), params)
        prepared.append(PreparedQuery(shift, encrypt(plaintext, pk, rng, mode), len(query_bits), period))

    return prepared


def build_match_kit(pk: PublicKey, rng: np.random.Generator, mode: EncryptMode = EncryptMode.STANDARD) -> MatchPolynomialKit:
    params = pk.params
    plaintext = PolyT(np.full(params.n, params.t_mask, dtype=np.uint64), params)
    return MatchPolynomialKit(plaintext, encrypt(plaintext, pk, rng, mode))


def secure_search(db: EncryptedDatabase, q: PreparedQuery, adder: Adder = hom_add) -> list[Ciphertext]:
    if db.params.ring_key() != q.ct.params.ring_key():
        raise DimensionError(f"database ring {db.params.ring_key()} does not match query ring {q.ct.params.ring_key()}")

    return [adder(ct, q.ct) for ct in db.cts]


def search_all(
    db: EncryptedDatabase,
    queries: Sequence[PreparedQuery],
    adder: Adder = hom_add,
    workers: int = 1,
) -> dict[int, list[Ciphertext]]:
    """Run secure_search for every prepared shift; each call fills its own result list."""
    if workers <= 1 or len(queries) <= 1:
        return {q.shift: secure_search(db, q, adder) for q in queries}

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {q.shift: pool.submit(copy_context().run, secure_search, db, q, adder) for q in queries}
        return {shift: future.result() for shift, future in futures.items()}


def copy_starts(db_meta: DatabaseMeta, q_meta: QueryMeta) -> np.ndarray:
    """Global bit offsets where a copy of the query begins under shift q_meta.shift."""
    block = db_meta.params.plaintext_bits
    p, y = q_meta.period, q_meta.query_bit_len

    local = np.arange((p - q_meta.shift) % p, block, p, dtype=np.int64)
    starts = (np.arange(db_meta.ciphertexts, dtype=np.int64)[:, None] * block + local[None, :]).reshape(-1)
    return starts[starts + y <= db_meta.bit_len]


def _prefix(matched: np.ndarray) -> np.ndarray:
    return np.concatenate(([0], np.cumsum(matched.astype(np.int64))))


def _all_set(prefix: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # an empty range (hi == lo - 1) counts as set
    return prefix[hi + 1] - prefix[lo] == hi - lo + 1


def indices_from_flags(flags: Mapping[int, np.ndarray], db_meta: DatabaseMeta, q_meta: QueryMeta) -> list[MatchIndex]:
    """
    Copies starting under q_meta.shift whose coefficients are all flagged.

    A copy that runs into the next ciphertext continues the stream there at
    shift (shift + n*t_bits) mod p, so its tail is read from that shift's
    flags. Crossing copies are dropped when that shift is absent from `flags`.
    """
    params = db_meta.params
    block, t_bits = params.plaintext_bits, params.t_bits
    p, shift = q_meta.period, q_meta.shift

    starts = copy_starts(db_meta, q_meta)
    first = starts // t_bits
    last = (starts + q_meta.query_bit_len - 1) // t_bits
    split = np.minimum((starts // block + 1) * params.n, last + 1)

    head = _all_set(_prefix(flags[shift]), first, split - 1)

    tail_flags = flags.get((shift + block) % p)
    if tail_flags is None:
        full = head & (split > last)
    else:
        full = head & _all_set(_prefix(tail_flags), split, last)

    return [MatchIndex(int(b), shift, q_meta.query_bit_len) for b in starts[full]]


def match_flags(
    results: Sequence[Ciphertext],
    kit: MatchPolynomialKit | None,
    db_meta: DatabaseMeta,
    sk: SecretKey | None,
    mode: IndexMode = IndexMode.CLIENT_DECRYPT,
) -> np.ndarray:
    """One flag per database coefficient: True where the result decrypts to all ones."""
    if sk is None:
        raise MissingInputError(f"index generation in {mode.value} mode needs the secret key")
    if mode is IndexMode.SUBTRACT and kit is None:
        raise MissingInputError("subtract mode needs an encrypted match polynomial")

    if len(results) != db_meta.ciphertexts:
        raise PackingError(f"expected {db_meta.ciphertexts} result ciphertexts, got {len(results)}")

    t_mask = np.uint64(db_meta.params.t_mask)
    flags: list[np.ndarray] = []

    for ct in results:
        if mode is IndexMode.SUBTRACT:
            flags.append(decrypt(hom_sub(ct, kit.ct), sk).coeffs == 0)
        else:
            flags.append(decrypt(ct, sk).coeffs == t_mask)

    return np.concatenate(flags)


def generate_indices(
    results: Sequence[Ciphertext],
    kit: MatchPolynomialKit | None,
    db_meta: DatabaseMeta,
    q_meta: QueryMeta,
    sk: SecretKey | None,
    mode: IndexMode = IndexMode.CLIENT_DECRYPT,
    neighbor_flags: Mapping[int, np.ndarray] | None = None,
) -> list[MatchIndex]:
    """
    Match indices for one shift.

    Pass the other shifts' match_flags as `neighbor_flags` to also report
    copies that cross into the next ciphertext when the period does not
    divide n*t_bits.
    """
    flags = dict(neighbor_flags or {})
    flags[q_meta.shift] = match_flags(results, kit, db_meta, sk, mode)
    return indices_from_flags(flags, db_meta, q_meta)


def generate_all_indices(
    results: Mapping[int, Sequence[Ciphertext]],
    queries: Sequence[PreparedQuery],
    kit: MatchPolynomialKit | None,
    db_meta: DatabaseMeta,
    sk: SecretKey | None,
    mode: IndexMode = IndexMode.CLIENT_DECRYPT,
) -> list[MatchIndex]:
    flags = {q.shift: match_flags(results[q.shift], kit, db_meta, sk, mode) for q in queries}

    found: list[MatchIndex] = []
    for q in queries:
        found.extend(indices_from_flags(flags, db_meta, q.meta))

    return sorted(found)


def run_search(
    db: EncryptedDatabase,
    queries: Sequence[PreparedQuery],
    kit: MatchPolynomialKit | None,
    sk: SecretKey,
    mode: IndexMode = IndexMode.CLIENT_DECRYPT,
    adder: Adder = hom_add,
    workers: int = 1,
) -> list[MatchIndex]:
    results = search_all(db, queries, adder, workers)
    found = generate_all_indices(results, queries, kit, db.meta, sk, mode)

    logger.debug(f"run_search: {len(found)} matches over {len(queries)} shifts")
    return found


def plaintext_oracle(bits: BitString, query_bits: BitString, params: HeParams) -> list[MatchIndex]:
    """
    Reference matching computed bit by bit on the plaintext database, no encryption involved.

    A copy at bit b is reported when every coefficient it touches, padding
    included, equals the query stream aligned so that b is its first bit.
    """
    _check_query(query_bits, params)

    y, t_bits, block = len(query_bits), params.t_bits, params.plaintext_bits
    if y > len(bits):
        return []

    period = minimal_period(query_bits)
    pattern = query_bits.bits[:period]

    padded = np.zeros(polynomial_count(len(bits), params) * block, dtype=np.uint8)
    padded[: len(bits)] = bits.bits
    positions = np.arange(padded.size, dtype=np.int64)
    candidates = np.arange(len(bits) - y + 1, dtype=np.int64)

    found: list[MatchIndex] = []
    for phase in range(period):
        starts = candidates[candidates % period == phase]
        if not starts.size:
            continue

        mismatch = _prefix(padded != pattern[(positions - phase) % period])
        first = starts // t_bits * t_bits
        end = -(-(starts + y) // t_bits) * t_bits
        hits = starts[mismatch[end] - mismatch[first] == 0]
        found.extend(MatchIndex(int(b), (-(int(b) % block)) % period, y) for b in hits)

    return sorted(found)


def naive_substring_scan(bits: BitString, query_bits: BitString) -> list[int]:
    """Every bit offset where the query occurs in the database."""
    y = len(query_bits)
    if y > len(bits):
        return []

    windows = np.lib.stride_tricks.sliding_window_view(bits.bits, y)
    return [int(o) for o in np.flatnonzero(np.all(windows == query_bits.bits, axis=1))]


def diff_indices(expected: Iterable[MatchIndex], actual: Iterable[MatchIndex]) -> tuple[list[MatchIndex], list[MatchIndex]]:
    """(missing, unexpected) between two index sets."""
    want, got = set(expected), set(actual)
    return sorted(want - got), sorted(got - want)

