"""
Exact arithmetic in Z_q[X]/(X^n + 1) and Z_t[X]/(X^n + 1).

Both moduli are powers of two, so every reduction is a bit mask and
products can be accumulated in uint64 (which wraps mod 2^64, a multiple
of every supported q).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import ClassVar, Sequence

import numpy as np

from ciphermatch.core.errors import DimensionError, FormatError
from ciphermatch.models.he_params import HeParams
from ciphermatch.store.codec import POLY_HEADER, POLY_MAGIC, params_from_fields, read_array, read_struct, wire_dtype
from ciphermatch.utils import op_trace


@dataclass(slots=True, frozen=True, eq=False)
class _Poly:
    coeffs: np.ndarray
    params: HeParams

    modulus_attr: ClassVar[str] = ""

    def __post_init__(self) -> None:
        bits: int = getattr(self.params, self.modulus_attr)
        raw = np.asarray(self.coeffs)

        if raw.ndim != 1 or raw.shape[0] != self.params.n:
            raise DimensionError(f"{type(self).__name__} needs exactly {self.params.n} coefficients, got shape {raw.shape}")

        if raw.size and (np.any(raw < 0) if raw.dtype.kind in "if" else False):
            raise ValueError(f"{type(self).__name__} coefficients must be non-negative residues")

        arr = raw.astype(np.uint64, copy=True)
        if arr.size and int(arr.max()) >> bits:
            raise ValueError(f"{type(self).__name__} coefficient out of range [0, 2^{bits})")

        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self.params.ring_key() == other.params.ring_key() and np.array_equal(self.coeffs, other.coeffs)

    def __len__(self) -> int:
        return self.params.n

    def __getitem__(self, index: int) -> int:
        return int(self.coeffs[index])

    def is_zero(self) -> bool:
        return not bool(np.any(self.coeffs))


class PolyQ(_Poly):
    modulus_attr = "q_bits"


class PolyT(_Poly):
    modulus_attr = "t_bits"


def _check_same(a: _Poly, b: _Poly) -> None:
    if a.params.ring_key() != b.params.ring_key():
        raise DimensionError(f"ring mismatch: {a.params.ring_key()} vs {b.params.ring_key()}")


def zero_q(params: HeParams) -> PolyQ:
    return PolyQ(np.zeros(params.n, dtype=np.uint64), params)


def zero_t(params: HeParams) -> PolyT:
    return PolyT(np.zeros(params.n, dtype=np.uint64), params)


def constant_q(value: int, params: HeParams) -> PolyQ:
    coeffs = np.zeros(params.n, dtype=np.uint64)
    coeffs[0] = value % params.q
    return PolyQ(coeffs, params)


def from_signed(values: Sequence[int] | np.ndarray, params: HeParams) -> PolyQ:
    """Embed signed integers into Z_q by reducing each mod q."""
    signed = np.asarray(values, dtype=np.int64)
    return PolyQ((signed & np.int64(params.q_mask)).astype(np.uint64), params)


def centered(a: PolyQ) -> np.ndarray:
    """Representatives in [-q/2, q/2) as int64."""
    values = a.coeffs.astype(np.int64)
    half = a.params.q >> 1
    return np.where(values >= half, values - a.params.q, values)


def poly_add(a: PolyQ, b: PolyQ) -> PolyQ:
    _check_same(a, b)
    op_trace.record("poly_add")
    return PolyQ((a.coeffs + b.coeffs) & np.uint64(a.params.q_mask), a.params)


def poly_neg(a: PolyQ) -> PolyQ:
    op_trace.record("poly_neg")
    mask = np.uint64(a.params.q_mask)
    return PolyQ((~a.coeffs + np.uint64(1)) & mask, a.params)


def poly_sub(a: PolyQ, b: PolyQ) -> PolyQ:
    return poly_add(a, poly_neg(b))


def poly_scale(a: PolyQ, factor: int) -> PolyQ:
    return PolyQ((a.coeffs * np.uint64(factor % a.params.q)) & np.uint64(a.params.q_mask), a.params)


@lru_cache(maxsize=8)
def _negacyclic_plan(n: int) -> tuple[np.ndarray, np.ndarray]:
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    # X^i * X^j with i + j >= n wraps to -X^(i + j - n)
    return (rows - cols) % n, rows < cols


def poly_mul_negacyclic(a: PolyQ, b: PolyQ) -> PolyQ:
    """Schoolbook product reduced by X^n = -1, coefficients mod q."""
    _check_same(a, b)
    op_trace.record("poly_mul")

    index, wrapped = _negacyclic_plan(a.params.n)
    matrix = a.coeffs[index]
    matrix = np.where(wrapped, ~matrix + np.uint64(1), matrix)
    product = matrix @ b.coeffs

    return PolyQ(product & np.uint64(a.params.q_mask), a.params)


def lift(m: PolyT, params: HeParams) -> PolyQ:
    """Scale a plaintext into Z_q by delta = 2^(q_bits - t_bits)."""
    if m.params.ring_key() != params.ring_key():
        raise DimensionError(f"ring mismatch: {m.params.ring_key()} vs {params.ring_key()}")
    return poly_scale(PolyQ(m.coeffs, params), params.delta)


def sample_uniform(params: HeParams, rng: np.random.Generator) -> PolyQ:
    return PolyQ(rng.integers(0, params.q, size=params.n, dtype=np.uint64), params)


def sample_ternary(params: HeParams, rng: np.random.Generator) -> PolyQ:
    return from_signed(rng.integers(-1, 2, size=params.n), params)


def sample_error(params: HeParams, rng: np.random.Generator) -> PolyQ:
    """Rounded centered Gaussian with standard deviation noise_stddev."""
    return from_signed(np.rint(rng.normal(0.0, params.noise_stddev, size=params.n)).astype(np.int64), params)


def poly_to_bytes(a: PolyQ) -> bytes:
    header = POLY_HEADER.pack(POLY_MAGIC, a.params.n, a.params.q_bits, a.params.t_bits)
    return header + a.coeffs.astype(wire_dtype(a.params.q_bits)).tobytes()


def poly_from_bytes(data: bytes | memoryview, offset: int = 0, params: HeParams | None = None) -> tuple[PolyQ, int]:
    """Decode one polynomial starting at `offset`; returns it and the next offset."""
    (_, n, q_bits, t_bits), offset = read_struct(POLY_HEADER, data, offset, POLY_MAGIC)
    decoded = params_from_fields(n, q_bits, t_bits)

    if params is not None and params.ring_key() != decoded.ring_key():
        raise FormatError(f"polynomial header {decoded.ring_key()} does not match expected {params.ring_key()}")

    coeffs, offset = read_array(data, offset, n, wire_dtype(q_bits))
    return PolyQ(coeffs, params or decoded), offset
