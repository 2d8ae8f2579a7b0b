import hashlib
from pathlib import Path

import numpy as np

from ciphermatch.core.errors import MissingInputError, PackingError

_DNA_CODES: dict[str, tuple[int, int]] = {"A": (0, 0), "C": (0, 1), "G": (1, 0), "T": (1, 1)}


def flatten_whitespace(text: str) -> str:
    return "".join(text.split())


def parse_bit_text(text: str) -> np.ndarray:
    """'0'/'1' characters to a uint8 bit vector; whitespace is ignored."""
    compact = flatten_whitespace(text)
    if not compact:
        raise PackingError("bit text is empty")

    if set(compact) - {"0", "1"}:
        bad = sorted(set(compact) - {"0", "1"})[0]
        raise PackingError(f"bit text may only contain '0' and '1', found {bad!r}")

    return (np.frombuffer(compact.encode("ascii"), dtype=np.uint8) - ord("0")).astype(np.uint8)


def encode_dna(text: str) -> np.ndarray:
    """ACGT bases to bits, two per base (A=00, C=01, G=10, T=11)."""
    bases = flatten_whitespace(text).upper()
    if not bases:
        raise PackingError("DNA sequence is empty")

    try:
        pairs = [_DNA_CODES[base] for base in bases]
    except KeyError as e:
        raise PackingError(f"unsupported DNA base {e.args[0]!r}, expected one of A, C, G, T") from e

    return np.asarray(pairs, dtype=np.uint8).reshape(-1)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()

    try:
        with path.open("rb") as handle:
            for block in iter(lambda: handle.read(1 << 20), b""):
                digest.update(block)
    except FileNotFoundError as e:
        raise MissingInputError(f"input file not found: {path}") from e

    return digest.hexdigest()

