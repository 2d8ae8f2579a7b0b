from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ciphermatch.he.bfv import EncryptMode, hom_add, keygen
from ciphermatch.models.he_params import HeParams
from ciphermatch.models.match_index import MatchIndex
from ciphermatch.search.matcher import (
    Adder,
    IndexMode,
    build_match_kit,
    diff_indices,
    generate_all_indices,
    plaintext_oracle,
    prepare_database,
    prepare_query,
    search_all,
)
from ciphermatch.search.packing import BitString
from ciphermatch.utils.op_trace import track_operations

# 48 and 80 do not divide a power-of-two polynomial, so their copies cross ciphertexts at a new phase
QUERY_SIZES: tuple[int, ...] = (16, 32, 48, 64, 80, 128, 256)


@dataclass(slots=True, frozen=True)
class VerifyOutcome:
    db_bits: int
    query_bits: int
    found: tuple[MatchIndex, ...]
    missing: tuple[MatchIndex, ...]
    unexpected: tuple[MatchIndex, ...]
    hom_adds: int
    expected_hom_adds: int
    ring_multiplications: int

    @property
    def ok(self) -> bool:
        return (
            not self.missing
            and not self.unexpected
            and self.hom_adds == self.expected_hom_adds
            and self.ring_multiplications == 0
        )

    def as_dict(self) -> dict[str, object]:
        return {
            "db_bits": self.db_bits,
            "query_bits": self.query_bits,
            "matches": len(self.found),
            "missing": [m.as_dict() for m in self.missing],
            "unexpected": [m.as_dict() for m in self.unexpected],
            "hom_adds": self.hom_adds,
            "expected_hom_adds": self.expected_hom_adds,
            "ring_multiplications": self.ring_multiplications,
            "ok": self.ok,
        }


def random_case(rng: np.random.Generator, params: HeParams, max_db_bits: int) -> tuple[BitString, BitString]:
    """A random database with a few copies of a random query planted at t_bits-aligned offsets."""
    sizes = [s for s in QUERY_SIZES if s <= min(params.plaintext_bits, max_db_bits)] or [min(params.t_bits, max_db_bits)]
    y = int(rng.choice(sizes))

    db = rng.integers(0, 2, size=int(rng.integers(y, max_db_bits + 1)), dtype=np.uint8)
    query = rng.integers(0, 2, size=y, dtype=np.uint8)

    slots = (len(db) - y) // params.t_bits + 1
    for _ in range(int(rng.integers(0, 4))):
        offset = int(rng.integers(0, slots)) * params.t_bits
        db[offset : offset + y] = query

    return BitString(db), BitString(query)


def verify_case(
    db_bits: BitString,
    query_bits: BitString,
    params: HeParams,
    rng: np.random.Generator,
    encrypt_mode: EncryptMode = EncryptMode.STANDARD,
    index_mode: IndexMode = IndexMode.CLIENT_DECRYPT,
    adder: Adder = hom_add,
    workers: int = 1,
) -> VerifyOutcome:
    """Run the encrypted pipeline on one instance and diff it against the plaintext oracle."""
    sk, pk = keygen(params, rng)
    db = prepare_database(db_bits, pk, params, rng, encrypt_mode)
    queries = prepare_query(query_bits, pk, params, rng, encrypt_mode)
    kit = build_match_kit(pk, rng, encrypt_mode)

    with track_operations() as ops:
        results = search_all(db, queries, adder, workers)

    found = generate_all_indices(results, queries, kit, db.meta, sk, index_mode)

    missing, unexpected = diff_indices(plaintext_oracle(db_bits, query_bits, params), found)

    return VerifyOutcome(
        db_bits=len(db_bits),
        query_bits=len(query_bits),
        found=tuple(sorted(found)),
        missing=tuple(missing),
        unexpected=tuple(unexpected),
        hom_adds=ops["hom_add"],
        expected_hom_adds=len(db.cts) * len(queries),
        ring_multiplications=ops["poly_mul"],
    )
