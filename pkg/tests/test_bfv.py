import numpy as np
import pytest

from ciphermatch.core.errors import DimensionError, FormatError
from ciphermatch.he.bfv import (
    KEY_ERROR_BOUND_STDDEVS,
    Ciphertext,
    EncryptMode,
    ciphertext_from_bytes,
    ciphertext_to_bytes,
    decrypt,
    encrypt,
    hom_add,
    hom_neg,
    hom_sub,
    keygen,
    noise_budget,
    public_key_from_bytes,
    public_key_to_bytes,
    secret_key_from_bytes,
    secret_key_to_bytes,
    trivial_encrypt,
)
from ciphermatch.he.ring_core import PolyT, centered, from_signed, poly_add, poly_mul_negacyclic, poly_sub
from ciphermatch.models.he_params import HeParams
from ciphermatch.utils.op_trace import track_operations


def random_plaintext(params: HeParams, rng: np.random.Generator) -> PolyT:
    return PolyT(rng.integers(0, params.t, size=params.n, dtype=np.uint64), params)


def test_keygen_is_deterministic_per_seed(small_params):
    sk_a, pk_a = keygen(small_params, np.random.default_rng(5))
    sk_b, pk_b = keygen(small_params, np.random.default_rng(5))

    assert sk_a.s == sk_b.s
    assert pk_a.pk0 == pk_b.pk0 and pk_a.pk1 == pk_b.pk1


def test_secret_key_is_ternary(keys):
    sk, _ = keys
    assert set(centered(sk.s).tolist()) <= {-1, 0, 1}


@pytest.mark.parametrize("mode", list(EncryptMode))
def test_encrypt_decrypt_round_trip(small_params, keys, rng, mode):
    sk, pk = keys
    m = random_plaintext(small_params, rng)

    assert decrypt(encrypt(m, pk, rng, mode), sk) == m


def test_zero_and_max_plaintexts(small_params, keys, rng):
    sk, pk = keys
    zeros = PolyT(np.zeros(small_params.n, dtype=np.uint64), small_params)
    ones = PolyT(np.full(small_params.n, small_params.t_mask, dtype=np.uint64), small_params)

    assert decrypt(encrypt(zeros, pk, rng), sk) == zeros
    assert decrypt(encrypt(ones, pk, rng), sk) == ones


def test_fresh_encryptions_differ(small_params, keys, rng):
    _, pk = keys
    m = random_plaintext(small_params, rng)

    assert encrypt(m, pk, rng).c0 != encrypt(m, pk, rng).c0


def test_literal_mode_encryptions_share_the_key_mask(small_params, keys, rng):
    _, pk = keys
    a = encrypt(random_plaintext(small_params, rng), pk, rng, EncryptMode.PAPER_LITERAL)
    b = encrypt(random_plaintext(small_params, rng), pk, rng, EncryptMode.PAPER_LITERAL)

    # c1 is pk1 plus a small error
    for ct in (a, b):
        assert np.max(np.abs(centered(poly_sub(ct.c1, pk.pk1)))) < 10 * small_params.noise_stddev


@pytest.mark.parametrize("mode", list(EncryptMode))
def test_one_addition_decrypts_to_the_sum(small_params, keys, rng, mode):
    sk, pk = keys
    a = random_plaintext(small_params, rng)
    b = random_plaintext(small_params, rng)

    total = hom_add(encrypt(a, pk, rng, mode), encrypt(b, pk, rng, mode))
    expected = (a.coeffs + b.coeffs) & np.uint64(small_params.t_mask)

    assert decrypt(total, sk).coeffs.tolist() == expected.tolist()
    assert total.level == 1


def test_complementary_plaintexts_sum_to_all_ones(small_params, keys, rng):
    sk, pk = keys
    a = random_plaintext(small_params, rng)
    complement = PolyT(a.coeffs ^ np.uint64(small_params.t_mask), small_params)

    total = decrypt(hom_add(encrypt(a, pk, rng), encrypt(complement, pk, rng)), sk)

    assert np.all(total.coeffs == small_params.t_mask)


def test_sub_and_neg(small_params, keys, rng):
    sk, pk = keys
    a = random_plaintext(small_params, rng)
    ct = encrypt(a, pk, rng)

    assert decrypt(hom_sub(ct, ct), sk).is_zero()
    assert decrypt(hom_add(ct, hom_neg(ct)), sk).is_zero()


def test_add_counts_one_hom_add_and_no_multiplication(small_params, keys, rng):
    _, pk = keys
    a = encrypt(random_plaintext(small_params, rng), pk, rng)

    with track_operations() as ops:
        hom_add(a, a)

    assert ops["hom_add"] == 1
    assert ops["poly_mul"] == 0


def test_add_rejects_mixed_rings(small_params, tiny_params, rng):
    a = trivial_encrypt(PolyT(np.zeros(small_params.n, dtype=np.uint64), small_params))
    b = trivial_encrypt(PolyT(np.zeros(tiny_params.n, dtype=np.uint64), tiny_params))

    with pytest.raises(DimensionError):
        hom_add(a, b)


def test_trivial_encryption_has_full_budget(small_params, keys, rng):
    sk, _ = keys
    ct = trivial_encrypt(random_plaintext(small_params, rng))

    assert noise_budget(ct, sk) == pytest.approx(np.log2(small_params.delta / 2))


def test_budget_shrinks_but_stays_positive_after_one_addition(small_params, keys, rng):
    sk, pk = keys
    fresh = encrypt(random_plaintext(small_params, rng), pk, rng)
    added = hom_add(fresh, encrypt(random_plaintext(small_params, rng), pk, rng))

    full = np.log2(small_params.delta / 2)
    assert 0 < noise_budget(fresh, sk) <= full
    assert 0 < noise_budget(added, sk) <= full


def test_ciphertext_bytes_round_trip(small_params, keys, rng):
    _, pk = keys
    ct = hom_add(encrypt(random_plaintext(small_params, rng), pk, rng), encrypt(random_plaintext(small_params, rng), pk, rng))

    decoded, end = ciphertext_from_bytes(ciphertext_to_bytes(ct))

    assert (decoded.c0, decoded.c1, decoded.level) == (ct.c0, ct.c1, ct.level)
    assert end == len(ciphertext_to_bytes(ct))


def test_key_bytes_round_trip(keys):
    sk, pk = keys

    assert secret_key_from_bytes(secret_key_to_bytes(sk)).s == sk.s
    loaded = public_key_from_bytes(public_key_to_bytes(pk))
    assert (loaded.pk0, loaded.pk1) == (pk.pk0, pk.pk1)


def test_key_bytes_reject_trailing_data_and_wrong_kind(keys):
    sk, pk = keys

    with pytest.raises(FormatError):
        secret_key_from_bytes(secret_key_to_bytes(sk) + b"\x00")
    with pytest.raises(FormatError):
        secret_key_from_bytes(public_key_to_bytes(pk))


def with_noise(ct: Ciphertext, offsets: dict[int, int]) -> Ciphertext:
    signed = np.zeros(ct.params.n, dtype=np.int64)
    for index, value in offsets.items():
        signed[index] = value
    return Ciphertext(poly_add(ct.c0, from_signed(signed, ct.params)), ct.c1, ct.level)


def test_public_key_error_stays_within_six_stddevs(small_params, keys):
    sk, pk = keys
    residual = centered(poly_add(pk.pk0, poly_mul_negacyclic(pk.pk1, sk.s)))

    assert np.max(np.abs(residual)) <= KEY_ERROR_BOUND_STDDEVS * small_params.noise_stddev


@pytest.mark.parametrize("mode", list(EncryptMode))
def test_long_addition_chain_decrypts_to_the_wrapped_sum(small_params, keys, rng, mode):
    sk, pk = keys
    plaintexts = [random_plaintext(small_params, rng) for _ in range(65)]

    acc = encrypt(plaintexts[0], pk, rng, mode)
    for m in plaintexts[1:]:
        acc = hom_add(acc, encrypt(m, pk, rng, mode))

    expected = np.sum([m.coeffs for m in plaintexts], axis=0, dtype=np.uint64) & np.uint64(small_params.t_mask)
    assert acc.level == 64
    assert decrypt(acc, sk).coeffs.tolist() == expected.tolist()


def test_budget_never_grows_while_adding_a_ciphertext_to_itself(small_params, keys, rng):
    sk, pk = keys
    m = random_plaintext(small_params, rng)
    ct = encrypt(m, pk, rng)

    acc, budgets = ct, [noise_budget(ct, sk)]
    for k in range(2, 65):
        acc = hom_add(acc, ct)
        total = PolyT((m.coeffs * np.uint64(k)) & np.uint64(small_params.t_mask), small_params)
        budgets.append(noise_budget(acc, sk, expected=total))

    assert all(later <= earlier + 1e-9 for earlier, later in zip(budgets, budgets[1:]))
    assert budgets[-1] == pytest.approx(budgets[0] - 6)


@pytest.mark.parametrize("fraction", [0.0, 0.25, 0.49, 0.51, 0.75, 0.99, 1.51, -0.25, -0.49, -0.51, -0.99])
def test_exhausted_budget_lines_up_with_wrong_decryption(small_params, keys, rng, fraction):
    sk, _ = keys
    m = random_plaintext(small_params, rng)
    ct = with_noise(trivial_encrypt(m), {0: int(fraction * small_params.delta), 7: 3})

    assert (noise_budget(ct, sk, expected=m) <= 0) == (decrypt(ct, sk) != m)


def test_overflowed_ciphertext_still_reports_a_positive_budget(small_params, keys, rng):
    sk, _ = keys
    m = random_plaintext(small_params, rng)
    ct = with_noise(trivial_encrypt(m), {0: small_params.delta // 2 + 1000})

    assert decrypt(ct, sk) != m
    assert decrypt(ct, sk)[0] == (m[0] + 1) & small_params.t_mask
    # measured against the decrypted message the wrap is invisible
    assert noise_budget(ct, sk) > 0
    assert noise_budget(ct, sk, expected=m) < 0


@pytest.mark.acceptance
def test_round_trips_at_full_size():
    params = HeParams()
    rng = np.random.default_rng(21)
    sk, pk = keygen(params, rng)

    for _ in range(10_000):
        m = random_plaintext(params, rng)
        assert decrypt(encrypt(m, pk, rng), sk) == m


@pytest.mark.acceptance
def test_addition_pairs_at_full_size():
    params = HeParams()
    rng = np.random.default_rng(22)
    sk, pk = keygen(params, rng)

    for _ in range(10_000):
        a, b = random_plaintext(params, rng), random_plaintext(params, rng)
        total = decrypt(hom_add(encrypt(a, pk, rng), encrypt(b, pk, rng)), sk)
        assert total.coeffs.tolist() == ((a.coeffs + b.coeffs) & np.uint64(params.t_mask)).tolist()
