import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convergelab.crypto import ec
from convergelab.crypto.ec import P256, TOY_CURVE
from convergelab.crypto.selftest import ToyGroupOracle, enumerate_points

# k*G for k = 1..19 on y^2 = x^3 + 2x + 2 (mod 17), G = (5, 1); computed with
# the brute-force collinearity oracle in crypto.selftest and frozen here.
TOY_MULTIPLES = [
    (5, 1), (6, 3), (10, 6), (3, 1), (9, 16), (16, 13), (0, 6), (13, 7), (7, 6),
    (7, 11), (13, 10), (0, 11), (16, 4), (9, 1), (3, 16), (10, 11), (6, 14), (5, 16), None,
]

ORACLE = ToyGroupOracle(TOY_CURVE)
toy_points = st.sampled_from(ORACLE.points)


def test_oracle_matches_frozen_multiples():
    assert ORACLE.multiples(TOY_CURVE.G, 19) == TOY_MULTIPLES


def test_toy_curve_has_19_points():
    assert len(enumerate_points(TOY_CURVE)) == 19


def test_add_identity():
    assert ec.point_add((5, 1), None, TOY_CURVE) == (5, 1)
    assert ec.point_add(None, (5, 1), TOY_CURVE) == (5, 1)


def test_add_inverse_pair():
    assert ec.point_add((5, 1), (5, 17 - 1), TOY_CURVE) is None


def test_double_g():
    assert ec.point_add(TOY_CURVE.G, TOY_CURVE.G, TOY_CURVE) == (6, 3)


def test_point_add_full_table_matches_oracle():
    for P in ORACLE.points:
        for Q in ORACLE.points:
            assert ec.point_add(P, Q, TOY_CURVE) == ORACLE.add(P, Q)


@pytest.mark.parametrize("k", range(1, 19))
def test_scalar_mul_matches_repeated_addition(k):
    assert ec.scalar_mul(k, TOY_CURVE.G, TOY_CURVE) == TOY_MULTIPLES[k - 1]


def test_scalar_mul_one_and_n_minus_one():
    assert ec.scalar_mul(1, P256.G, P256) == P256.G
    assert ec.scalar_mul(P256.n - 1, P256.G, P256) == ec.negate(P256.G, P256)
    assert ec.scalar_mul(18, TOY_CURVE.G, TOY_CURVE) == ec.negate(TOY_CURVE.G, TOY_CURVE)


@pytest.mark.parametrize("k", [0, 19, 20, -1])
def test_scalar_mul_rejects_out_of_range(k):
    with pytest.raises(ec.InvalidScalar):
        ec.scalar_mul(k, TOY_CURVE.G, TOY_CURVE)


def test_p256_known_answer():
    k = 0xCC496A11D4CFC0958657918858041182AC6A9570DF89FD21F486FDA95FD0DC4D
    x = 0x2B953776B6C5BF472BC8DC016004AAD9EB264B80B1E7B030FFD21DF1632AB5EA
    y = 0xC9FD1CE99F3ABEE0CD212FFDD399A58BBC60466DB2E8F4BADFDA8D53BE4F8073
    assert ec.scalar_mul(k, P256.G, P256) == (x, y)


def test_p256_order():
    assert P256.check_order()
    assert TOY_CURVE.check_order()


def test_ecdh_toy_3_and_7():
    a, b = 3, 7
    shared = ec.ecdh_shared(a, ec.scalar_mul(b, TOY_CURVE.G, TOY_CURVE), TOY_CURVE)
    # 21*G = 2*G = (6, 3) since the group has order 19
    assert shared == bytes([6])


def test_ecdh_rejects_off_curve_point():
    assert (0 * 0 - (0 + 0 + 2)) % 17 != 0
    with pytest.raises(ec.PointNotOnCurve):
        ec.ecdh_shared(3, (0, 0), TOY_CURVE)


def test_ecdh_rejects_infinity_peer():
    with pytest.raises(ec.PointNotOnCurve):
        ec.ecdh_shared(3, None, TOY_CURVE)


def test_ecdh_symmetry_p256():
    rng = random.Random(11)
    for _ in range(100):
        a, b = P256.random_scalar(rng), P256.random_scalar(rng)
        assert ec.ecdh_shared(a, ec.public_key(b, P256), P256) == ec.ecdh_shared(b, ec.public_key(a, P256), P256)


def test_shared_secret_fixed_width():
    rng = random.Random(1)
    for _ in range(20):
        a, b = P256.random_scalar(rng), P256.random_scalar(rng)
        assert len(ec.ecdh_shared(a, ec.public_key(b, P256), P256)) == 32


@settings(max_examples=200, deadline=None)
@given(toy_points, toy_points, toy_points)
def test_toy_associativity(P, Q, R):
    add = lambda u, v: ec.point_add(u, v, TOY_CURVE)
    assert add(add(P, Q), R) == add(P, add(Q, R))


@settings(max_examples=100, deadline=None)
@given(toy_points)
def test_toy_inverse_and_identity(P):
    assert ec.point_add(P, None, TOY_CURVE) == P
    assert ec.point_add(P, ec.negate(P, TOY_CURVE), TOY_CURVE) is None


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=P256.n - 1))
def test_point_encoding_roundtrip(k):
    P = ec.public_key(k, P256)
    assert ec.decode_point(ec.encode_point(P, P256), P256) == P


def test_point_encoding_roundtrip_toy():
    for P in ORACLE.points[1:]:
        assert ec.decode_point(ec.encode_point(P, TOY_CURVE), TOY_CURVE) == P


def test_decode_rejects_x_without_point():
    # x = 1 on the toy curve: 1 + 2 + 2 = 5 is a non-residue mod 17
    assert all(y * y % 17 != 5 for y in range(17))
    with pytest.raises(ec.PointNotOnCurve):
        ec.decode_point(bytes([2, 1]), TOY_CURVE)


def test_singular_curve_rejected():
    with pytest.raises(ValueError):
        ec.CurveParams(p=17, a=0, b=0, gx=0, gy=0, n=17)


def test_sqrt_mod_exhaustive_small_primes():
    for p in (17, 13, 41, 97):
        squares = {x * x % p for x in range(p)}
        for v in range(p):
            r = ec.sqrt_mod(v, p)
            if v in squares:
                assert r * r % p == v
            else:
                assert r is None
