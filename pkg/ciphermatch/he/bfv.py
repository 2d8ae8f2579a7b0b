from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ciphermatch.core.errors import DimensionError, FormatError, ParameterError
from ciphermatch.he.ring_core import (
    PolyQ,
    PolyT,
    centered,
    lift,
    poly_add,
    poly_from_bytes,
    poly_mul_negacyclic,
    poly_neg,
    poly_to_bytes,
    sample_error,
    sample_ternary,
    sample_uniform,
    zero_q,
)
from ciphermatch.models.he_params import HeParams
from ciphermatch.store.codec import (
    CIPHERTEXT_HEADER,
    CIPHERTEXT_MAGIC,
    KEY_HEADER,
    PUBLIC_KEY_MAGIC,
    SECRET_KEY_MAGIC,
    params_from_fields,
    read_struct,
)
from ciphermatch.utils import op_trace
from ciphermatch.utils.logger import logger

# keygen keeps resampling until the public-key error fits this many stddevs
KEY_ERROR_BOUND_STDDEVS = 6.0

_MAX_KEYGEN_ATTEMPTS = 64


class EncryptMode(str, Enum):
    STANDARD = "standard"
    PAPER_LITERAL = "paper-literal"


@dataclass(slots=True, frozen=True)
class SecretKey:
    s: PolyQ

    @property
    def params(self) -> HeParams:
        return self.s.params


@dataclass(slots=True, frozen=True)
class PublicKey:
    pk0: PolyQ
    pk1: PolyQ

    def __post_init__(self) -> None:
        if self.pk0.params != self.pk1.params:
            raise DimensionError("public key halves carry different parameters")

    @property
    def params(self) -> HeParams:
        return self.pk0.params


@dataclass(slots=True, frozen=True)
class Ciphertext:
    c0: PolyQ
    c1: PolyQ
    level: int = 0

    def __post_init__(self) -> None:
        if self.c0.params.ring_key() != self.c1.params.ring_key():
            raise DimensionError("ciphertext halves carry different ring parameters")

        if self.level < 0:
            raise ParameterError(f"ciphertext level must be >= 0, got {self.level}")

    @property
    def params(self) -> HeParams:
        return self.c0.params


def keygen(params: HeParams, rng: np.random.Generator) -> tuple[SecretKey, PublicKey]:
    s = sample_ternary(params, rng)
    pk1 = sample_uniform(params, rng)
    bound = KEY_ERROR_BOUND_STDDEVS * params.noise_stddev

    for attempt in range(1, _MAX_KEYGEN_ATTEMPTS + 1):
        e = sample_error(params, rng)
        if int(np.max(np.abs(centered(e)))) <= bound:
            break
        logger.debug(f"keygen: error sample exceeded {bound:.1f}, resampling (attempt {attempt})")
    else:
        raise ParameterError(f"could not sample a key error within {bound:.1f} after {_MAX_KEYGEN_ATTEMPTS} attempts")

    pk0 = poly_neg(poly_add(poly_mul_negacyclic(pk1, s), e))
    return SecretKey(s), PublicKey(pk0, pk1)


def encrypt(m: PolyT, pk: PublicKey, rng: np.random.Generator, mode: EncryptMode = EncryptMode.STANDARD) -> Ciphertext:
    """
    Encrypt a plaintext polynomial under the public key.

    STANDARD draws a fresh ternary u and returns
    (pk0*u + e0 + delta*m, pk1*u + e1). PAPER_LITERAL adds the key halves
    directly, (pk0 + e0 + delta*m, pk1 + e1), so every ciphertext under one
    key shares the same mask.
    """
    params = pk.params
    if m.params.ring_key() != params.ring_key():
        raise DimensionError(f"plaintext ring {m.params.ring_key()} does not match key ring {params.ring_key()}")

    op_trace.record("encrypt")
    scaled = lift(m, params)

    if mode is EncryptMode.PAPER_LITERAL:
        c0 = poly_add(poly_add(pk.pk0, sample_error(params, rng)), scaled)
        c1 = poly_add(pk.pk1, sample_error(params, rng))
        return Ciphertext(c0, c1)

    u = sample_ternary(params, rng)
    c0 = poly_add(poly_add(poly_mul_negacyclic(pk.pk0, u), sample_error(params, rng)), scaled)
    c1 = poly_add(poly_mul_negacyclic(pk.pk1, u), sample_error(params, rng))
    return Ciphertext(c0, c1)


def trivial_encrypt(m: PolyT) -> Ciphertext:
    """Noise-free (delta*m, 0); decrypts under any key."""
    return Ciphertext(lift(m, m.params), zero_q(m.params))


def _phase(ct: Ciphertext, sk: SecretKey) -> PolyQ:
    if ct.params.ring_key() != sk.params.ring_key():
        raise DimensionError(f"ciphertext ring {ct.params.ring_key()} does not match key ring {sk.params.ring_key()}")
    return poly_add(ct.c0, poly_mul_negacyclic(ct.c1, sk.s))


def _round_to_plaintext(phase: PolyQ) -> PolyT:
    params = phase.params
    shift = np.uint64(params.q_bits - params.t_bits)
    rounded = (phase.coeffs + np.uint64(params.delta >> 1)) >> shift
    return PolyT(rounded & np.uint64(params.t_mask), params)


def decrypt(ct: Ciphertext, sk: SecretKey) -> PolyT:
    op_trace.record("decrypt")
    return _round_to_plaintext(_phase(ct, sk))


def hom_add(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    if a.params.ring_key() != b.params.ring_key():
        raise DimensionError(f"hom_add ring mismatch: {a.params.ring_key()} vs {b.params.ring_key()}")

    op_trace.record("hom_add")
    return Ciphertext(poly_add(a.c0, b.c0), poly_add(a.c1, b.c1), max(a.level, b.level) + 1)


def hom_neg(a: Ciphertext) -> Ciphertext:
    op_trace.record("hom_neg")
    return Ciphertext(poly_neg(a.c0), poly_neg(a.c1), a.level)


def hom_sub(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    op_trace.record("hom_sub")
    return hom_add(a, hom_neg(b))


def noise_budget(ct: Ciphertext, sk: SecretKey, expected: PolyT | None = None) -> float:
    """
    Bits of headroom left before the infinity-norm noise reaches delta/2.

    Without `expected` the noise is taken against the decrypted message, so
    the budget never drops below zero and a ciphertext whose noise already
    wrapped into a neighbouring plaintext still reads as healthy. Pass the
    plaintext the ciphertext should hold to see an overflow as a budget <= 0.
    """
    phase = _phase(ct, sk)
    message = _round_to_plaintext(phase) if expected is None else expected
    noise = np.abs(centered(poly_add(phase, poly_neg(lift(message, phase.params)))))

    peak = max(int(noise.max()), 1)
    return math.log2(phase.params.delta / 2) - math.log2(peak)


def _check_trailing(data: bytes | memoryview, end: int, what: str) -> None:
    if end != len(data):
        raise FormatError(f"{what} has {len(data) - end} unexpected trailing bytes")


def ciphertext_to_bytes(ct: Ciphertext) -> bytes:
    p = ct.params
    header = CIPHERTEXT_HEADER.pack(CIPHERTEXT_MAGIC, p.n, p.q_bits, p.t_bits, p.noise_stddev, ct.level)
    return header + poly_to_bytes(ct.c0) + poly_to_bytes(ct.c1)


def ciphertext_from_bytes(data: bytes | memoryview, offset: int = 0) -> tuple[Ciphertext, int]:
    (_, n, q_bits, t_bits, noise, level), offset = read_struct(CIPHERTEXT_HEADER, data, offset, CIPHERTEXT_MAGIC)
    params = params_from_fields(n, q_bits, t_bits, noise)

    c0, offset = poly_from_bytes(data, offset, params)
    c1, offset = poly_from_bytes(data, offset, params)
    return Ciphertext(c0, c1, level), offset


def secret_key_to_bytes(sk: SecretKey) -> bytes:
    p = sk.params
    return KEY_HEADER.pack(SECRET_KEY_MAGIC, p.n, p.q_bits, p.t_bits, p.noise_stddev) + poly_to_bytes(sk.s)


def secret_key_from_bytes(data: bytes | memoryview) -> SecretKey:
    (_, n, q_bits, t_bits, noise), offset = read_struct(KEY_HEADER, data, 0, SECRET_KEY_MAGIC)
    s, offset = poly_from_bytes(data, offset, params_from_fields(n, q_bits, t_bits, noise))
    _check_trailing(data, offset, "secret key")

    c = centered(s)
    if np.any((c < -1) | (c > 1)):
        raise FormatError("secret key coefficients are not ternary")

    return SecretKey(s)


def public_key_to_bytes(pk: PublicKey) -> bytes:
    p = pk.params
    header = KEY_HEADER.pack(PUBLIC_KEY_MAGIC, p.n, p.q_bits, p.t_bits, p.noise_stddev)
    return header + poly_to_bytes(pk.pk0) + poly_to_bytes(pk.pk1)


def public_key_from_bytes(data: bytes | memoryview) -> PublicKey:
    (_, n, q_bits, t_bits, noise), offset = read_struct(KEY_HEADER, data, 0, PUBLIC_KEY_MAGIC)
    params = params_from_fields(n, q_bits, t_bits, noise)

    pk0, offset = poly_from_bytes(data, offset, params)
    pk1, offset = poly_from_bytes(data, offset, params)
    _check_trailing(data, offset, "public key")
    return PublicKey(pk0, pk1)
