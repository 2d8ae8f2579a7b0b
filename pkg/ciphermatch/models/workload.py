from __future__ import annotations

from dataclasses import dataclass

from ciphermatch.core.errors import ParameterError

GIB = 1 << 30


@dataclass(slots=True, frozen=True)
class Workload:
    encrypted_db_bytes: int
    query_bits: int
    num_queries: int = 1
    shift_count: int | None = None

    def __post_init__(self) -> None:
        if self.encrypted_db_bytes < 0 or self.num_queries < 0:
            raise ParameterError(f"workload sizes must be non-negative: {self}")

        if self.query_bits < 1:
            raise ParameterError(f"query_bits must be positive, got {self.query_bits}")

        # one shifted variant per bit of a primitive query unless told otherwise
        if self.shift_count is None:
            object.__setattr__(self, "shift_count", self.query_bits)

        if self.shifts < 1:
            raise ParameterError(f"shift_count must be positive, got {self.shift_count}")

    @property
    def shifts(self) -> int:
        return int(self.shift_count or 0)

    @property
    def words(self) -> int:
        """32-bit ciphertext coefficients in the encrypted database."""
        return -(-self.encrypted_db_bytes // 4)

    def as_dict(self) -> dict[str, int]:
        return {
            "db_bytes": self.encrypted_db_bytes,
            "query_bits": self.query_bits,
            "num_queries": self.num_queries,
            "shift_count": self.shifts,
        }
