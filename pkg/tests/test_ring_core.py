import numpy as np
import pytest

from ciphermatch.core.errors import DimensionError, FormatError
from ciphermatch.he.ring_core import (
    PolyQ,
    PolyT,
    centered,
    constant_q,
    from_signed,
    lift,
    poly_add,
    poly_from_bytes,
    poly_mul_negacyclic,
    poly_neg,
    poly_scale,
    poly_sub,
    poly_to_bytes,
    sample_error,
    sample_ternary,
    sample_uniform,
    zero_q,
)
from ciphermatch.models.he_params import HeParams
from ciphermatch.utils.op_trace import track_operations


def monomial(degree: int, params: HeParams) -> PolyQ:
    coeffs = np.zeros(params.n, dtype=np.uint64)
    coeffs[degree] = 1
    return PolyQ(coeffs, params)


def schoolbook(a: PolyQ, b: PolyQ) -> list[int]:
    n, q = a.params.n, a.params.q
    out = [0] * n
    for i in range(n):
        for j in range(n):
            k = i + j
            term = a[i] * b[j]
            if k >= n:
                out[k - n] -= term
            else:
                out[k] += term
    return [v % q for v in out]


def test_add_wraps_modulo_q(small_params):
    top = constant_q(small_params.q - 1, small_params)
    one = constant_q(1, small_params)

    assert poly_add(top, one).is_zero()


def test_neg_and_sub(small_params, rng):
    a = sample_uniform(small_params, rng)
    b = sample_uniform(small_params, rng)

    assert poly_add(a, poly_neg(a)).is_zero()
    assert poly_add(poly_sub(a, b), b) == a


def test_scale_matches_repeated_addition(small_params, rng):
    a = sample_uniform(small_params, rng)
    assert poly_scale(a, 3) == poly_add(poly_add(a, a), a)


def test_x_to_the_n_is_minus_one(small_params):
    n = small_params.n
    product = poly_mul_negacyclic(monomial(n - 1, small_params), monomial(1, small_params))

    assert product[0] == small_params.q - 1
    assert not np.any(product.coeffs[1:])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_mul_matches_schoolbook(tiny_params, seed):
    rng = np.random.default_rng(seed)
    a = sample_uniform(tiny_params, rng)
    b = sample_uniform(tiny_params, rng)

    assert poly_mul_negacyclic(a, b).coeffs.tolist() == schoolbook(a, b)


def test_mul_is_commutative(small_params, rng):
    a = sample_uniform(small_params, rng)
    b = sample_ternary(small_params, rng)

    assert poly_mul_negacyclic(a, b) == poly_mul_negacyclic(b, a)


def test_mul_is_counted(small_params, rng):
    a = sample_uniform(small_params, rng)

    with track_operations() as ops:
        poly_mul_negacyclic(a, a)
        poly_add(a, a)

    assert ops["poly_mul"] == 1
    assert ops["poly_add"] == 1


def test_mixed_rings_are_rejected(small_params, tiny_params):
    with pytest.raises(DimensionError):
        poly_add(zero_q(small_params), zero_q(tiny_params))


def test_wrong_length_is_rejected(small_params):
    with pytest.raises(DimensionError):
        PolyQ(np.zeros(small_params.n + 1, dtype=np.uint64), small_params)


def test_out_of_range_coefficient_is_rejected(small_params):
    coeffs = np.zeros(small_params.n, dtype=np.uint64)
    coeffs[3] = small_params.t

    with pytest.raises(ValueError):
        PolyT(coeffs, small_params)


def test_coefficients_are_read_only(small_params):
    p = zero_q(small_params)
    with pytest.raises(ValueError):
        p.coeffs[0] = 1


def test_lift_scales_by_delta(small_params):
    coeffs = np.zeros(small_params.n, dtype=np.uint64)
    coeffs[0] = 1
    coeffs[1] = small_params.t_mask

    lifted = lift(PolyT(coeffs, small_params), small_params)

    assert lifted[0] == small_params.delta
    assert lifted[1] == small_params.t_mask * small_params.delta


def test_signed_embedding_round_trips(small_params):
    values = np.arange(-32, 32)
    assert centered(from_signed(values, small_params)).tolist() == values.tolist()


def test_samplers_stay_in_range(small_params, rng):
    ternary = centered(sample_ternary(small_params, rng))
    error = centered(sample_error(small_params, rng))

    assert set(ternary.tolist()) <= {-1, 0, 1}
    # 10 standard deviations on 64 draws
    assert np.max(np.abs(error)) < 10 * small_params.noise_stddev


def test_bytes_round_trip_with_offset(small_params, rng):
    a = sample_uniform(small_params, rng)
    b = sample_uniform(small_params, rng)
    blob = poly_to_bytes(a) + poly_to_bytes(b)

    first, offset = poly_from_bytes(blob)
    second, end = poly_from_bytes(blob, offset)

    assert (first, second) == (a, b)
    assert end == len(blob)


def test_bytes_reject_bad_magic_and_truncation(small_params, rng):
    blob = poly_to_bytes(sample_uniform(small_params, rng))

    with pytest.raises(FormatError):
        poly_from_bytes(b"XXXX" + blob[4:])
    with pytest.raises(FormatError):
        poly_from_bytes(blob[:-1])


def test_bytes_reject_other_ring(small_params, tiny_params, rng):
    blob = poly_to_bytes(sample_uniform(small_params, rng))

    with pytest.raises(FormatError):
        poly_from_bytes(blob, 0, tiny_params)


def test_error_samples_match_the_configured_spread():
    params = HeParams()
    rng = np.random.default_rng(3)
    draws = np.concatenate([centered(sample_error(params, rng)) for _ in range(-(-100_000 // params.n))])

    # rounding to integers adds 1/12 to the variance
    target = np.sqrt(params.noise_stddev**2 + 1 / 12)
    assert draws.size >= 100_000
    assert abs(draws.std() - target) <= 0.05 * target
    assert abs(draws.mean()) < 0.05


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_ring_laws(small_params, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (sample_uniform(small_params, rng) for _ in range(3))

    assert poly_add(a, b) == poly_add(b, a)
    assert poly_add(poly_add(a, b), c) == poly_add(a, poly_add(b, c))
    assert poly_mul_negacyclic(a, poly_add(b, c)) == poly_add(poly_mul_negacyclic(a, b), poly_mul_negacyclic(a, c))
