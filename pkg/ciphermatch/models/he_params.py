from __future__ import annotations

from dataclasses import dataclass

from ciphermatch.core.errors import ParameterError


@dataclass(slots=True, frozen=True)
class HeParams:
    n: int = 1024
    q_bits: int = 32
    t_bits: int = 16
    noise_stddev: float = 3.2

    def __post_init__(self) -> None:
        if self.n < 8 or self.n & (self.n - 1):
            raise ParameterError(f"ring dimension n must be a power of two >= 8, got {self.n}")

        # uint64 products wrap mod 2^64, which stays exact for q_bits <= 32
        if not 1 <= self.q_bits <= 32:
            raise ParameterError(f"q_bits must be in [1, 32], got {self.q_bits}")

        if not 1 <= self.t_bits < self.q_bits:
            raise ParameterError(f"t_bits must be in [1, q_bits), got t_bits={self.t_bits} q_bits={self.q_bits}")

        if self.noise_stddev < 0:
            raise ParameterError(f"noise_stddev must be non-negative, got {self.noise_stddev}")

    @classmethod
    def from_settings(cls, settings) -> HeParams:
        return cls(
            n=settings.ring_dimension,
            q_bits=settings.q_bits,
            t_bits=settings.t_bits,
            noise_stddev=settings.noise_stddev,
        )

    @property
    def q(self) -> int:
        return 1 << self.q_bits

    @property
    def t(self) -> int:
        return 1 << self.t_bits

    @property
    def delta(self) -> int:
        return 1 << (self.q_bits - self.t_bits)

    @property
    def q_mask(self) -> int:
        return self.q - 1

    @property
    def t_mask(self) -> int:
        return self.t - 1

    @property
    def coeff_bytes(self) -> int:
        """Wire width of one ciphertext coefficient (1, 2 or 4 bytes)."""
        return 1 if self.q_bits <= 8 else 2 if self.q_bits <= 16 else 4

    @property
    def plaintext_bits(self) -> int:
        """Data bits carried by one fully packed plaintext polynomial."""
        return self.n * self.t_bits

    def ring_key(self) -> tuple[int, int, int]:
        return (self.n, self.q_bits, self.t_bits)

    def as_dict(self) -> dict[str, int | float]:
        return {"n": self.n, "q_bits": self.q_bits, "t_bits": self.t_bits, "noise_stddev": self.noise_stddev}
