"""Prime-field short-Weierstrass curves and ECDH.

Points are ``None`` (the point at infinity) or an ``(x, y)`` tuple of ints.
Nothing here is constant-time; this is simulation-grade arithmetic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from convergelab import kernels

Point = Optional[tuple[int, int]]
INFINITY: Point = None


class PointNotOnCurve(ValueError):
    pass


class InfinityResult(ValueError):
    pass


class InvalidScalar(ValueError):
    pass


@dataclass(frozen=True)
class CurveParams:
    p: int
    a: int
    b: int
    gx: int
    gy: int
    n: int
    h: int = 1
    name: str = ""

    def __post_init__(self) -> None:
        p = self.p
        if (4 * self.a**3 + 27 * self.b**2) % p == 0:
            raise ValueError("singular curve")
        if not self.contains((self.gx, self.gy)):
            raise ValueError("base point is not on the curve")

    @property
    def G(self) -> tuple[int, int]:
        return (self.gx, self.gy)

    @property
    def byte_len(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def contains(self, P: Point) -> bool:
        if P is None:
            return True
        x, y = P
        if not (0 <= x < self.p and 0 <= y < self.p):
            return False
        return (y * y - (x * x * x + self.a * x + self.b)) % self.p == 0

    def check_order(self) -> bool:
        """True when n*G is the point at infinity."""
        return kernels.scalar_mul_jacobian(self.n, self.gx, self.gy, self.a, self.p) is None

    def random_scalar(self, rng: random.Random) -> int:
        return rng.randrange(1, self.n)


TOY_CURVE = CurveParams(p=17, a=2, b=2, gx=5, gy=1, n=19, h=1, name="toy17")

# NIST P-256 / secp256r1
P256 = CurveParams(
    p=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    a=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFC,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
    h=1,
    name="P-256",
)


def negate(P: Point, c: CurveParams) -> Point:
    if P is None:
        return None
    return (P[0], (-P[1]) % c.p)


def point_add(P: Point, Q: Point, c: CurveParams) -> Point:
    """Affine chord-and-tangent addition."""
    if P is None:
        return Q
    if Q is None:
        return P
    p = c.p
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + c.a) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return (x3, y3)


def scalar_mul(k: int, P: Point, c: CurveParams) -> Point:
    """k*P for 1 <= k <= n-1."""
    if not 1 <= k < c.n:
        raise InvalidScalar(f"scalar out of range [1, n-1]: {k}")
    if P is None:
        return None
    return kernels.scalar_mul_jacobian(k, P[0], P[1], c.a, c.p)


def public_key(priv: int, c: CurveParams) -> tuple[int, int]:
    Q = scalar_mul(priv, c.G, c)
    assert Q is not None
    return Q


def ecdh_shared(priv: int, peer_pub: Point, c: CurveParams) -> bytes:
    """x-coordinate of priv*peer_pub, fixed-width big-endian."""
    if peer_pub is None or not c.contains(peer_pub):
        raise PointNotOnCurve("peer public key is not a valid curve point")
    S = scalar_mul(priv, peer_pub, c)
    if S is None:
        raise InfinityResult("shared point is the point at infinity")
    return S[0].to_bytes(c.byte_len, "big")


def sqrt_mod(v: int, p: int) -> Optional[int]:
    """A square root of v modulo odd prime p, or None (Tonelli-Shanks)."""
    v %= p
    if v == 0:
        return 0
    if pow(v, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(v, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, cc, t, r = s, pow(z, q, p), pow(v, q, p), pow(v, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(cc, 1 << (m - i - 1), p)
        m, cc = i, b * b % p
        t, r = t * cc % p, r * b % p
    return r


def encode_point(P: Point, c: CurveParams) -> bytes:
    """SEC1 compressed encoding (0x02/0x03 || x); infinity is a single 0x00."""
    if P is None:
        return b"\x00"
    return bytes([2 | (P[1] & 1)]) + P[0].to_bytes(c.byte_len, "big")


def decode_point(data: bytes, c: CurveParams) -> tuple[int, int]:
    if len(data) != 1 + c.byte_len or data[0] not in (2, 3):
        raise PointNotOnCurve("bad point encoding")
    x = int.from_bytes(data[1:], "big")
    if x >= c.p:
        raise PointNotOnCurve("x-coordinate out of range")
    y = sqrt_mod(x * x * x + c.a * x + c.b, c.p)
    if y is None:
        raise PointNotOnCurve("x-coordinate has no point on the curve")
    if (y & 1) != (data[0] & 1):
        if y == 0:
            raise PointNotOnCurve("no point with the requested y parity")
        y = c.p - y
    P = (x, y)
    if not c.contains(P):
        raise PointNotOnCurve("decoded point fails the curve equation")
    return P
