from pathlib import Path
from typing import Sequence

from ciphermatch.core.errors import FormatError
from ciphermatch.he.ring_core import PolyT
from ciphermatch.models.he_params import HeParams
from ciphermatch.store.codec import PLAINTEXT_HEADER, PLAINTEXT_MAGIC, params_from_fields, read_array, read_struct, wire_dtype
from ciphermatch.store.file_store import FileStore, file_store


class PlaintextRepo:
    """Packed plaintext polynomials with the original bit length, before encryption."""

    def __init__(self, store: FileStore):
        self.store = store

    @staticmethod
    def encode(plaintexts: Sequence[PolyT], bit_len: int, params: HeParams) -> bytes:
        header = PLAINTEXT_HEADER.pack(
            PLAINTEXT_MAGIC, params.n, params.q_bits, params.t_bits, params.noise_stddev, len(plaintexts), bit_len
        )
        return header + b"".join(p.coeffs.astype(wire_dtype(params.t_bits)).tobytes() for p in plaintexts)

    @staticmethod
    def decode(data: bytes) -> tuple[list[PolyT], int, HeParams]:
        (_, n, q_bits, t_bits, noise, count, bit_len), offset = read_struct(PLAINTEXT_HEADER, data, 0, PLAINTEXT_MAGIC)
        params = params_from_fields(n, q_bits, t_bits, noise)

        plaintexts: list[PolyT] = []
        for _ in range(count):
            coeffs, offset = read_array(data, offset, n, wire_dtype(t_bits))
            try:
                plaintexts.append(PolyT(coeffs, params))
            except ValueError as e:
                raise FormatError(f"plaintext coefficient out of range: {e}") from e

        if offset != len(data):
            raise FormatError(f"packed plaintext file has {len(data) - offset} unexpected trailing bytes")

        return plaintexts, bit_len, params

    def save(self, path: Path, plaintexts: Sequence[PolyT], bit_len: int, params: HeParams) -> Path:
        return self.store.write_bytes(path, self.encode(plaintexts, bit_len, params))

    def load(self, path: Path) -> tuple[list[PolyT], int, HeParams]:
        return self.decode(self.store.read_bytes(path))


plaintext_repo = PlaintextRepo(file_store)
