"""Pure-Python reference versions of the compiled kernels.

Every function here returns exactly what its counterpart in ``_kernels.pyx``
returns for the same arguments, including float rounding.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

BACKEND = "python"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _jdouble(X, Y, Z, a, p):
    if Z == 0 or Y == 0:
        return 0, 1, 0
    XX = X * X % p
    YY = Y * Y % p
    YYYY = YY * YY % p
    ZZ = Z * Z % p
    S = 4 * X * YY % p
    M = (3 * XX + a * ZZ * ZZ) % p
    X3 = (M * M - 2 * S) % p
    Y3 = (M * (S - X3) - 8 * YYYY) % p
    Z3 = 2 * Y * Z % p
    return X3, Y3, Z3


def _jadd_affine(X1, Y1, Z1, x2, y2, a, p):
    if Z1 == 0:
        return x2, y2, 1
    Z1Z1 = Z1 * Z1 % p
    U2 = x2 * Z1Z1 % p
    S2 = y2 * Z1 * Z1Z1 % p
    H = (U2 - X1) % p
    R = (S2 - Y1) % p
    if H == 0:
        if R == 0:
            return _jdouble(X1, Y1, Z1, a, p)
        return 0, 1, 0
    HH = H * H % p
    HHH = H * HH % p
    V = X1 * HH % p
    X3 = (R * R - HHH - 2 * V) % p
    Y3 = (R * (V - X3) - Y1 * HHH) % p
    Z3 = Z1 * H % p
    return X3, Y3, Z3


def scalar_mul_jacobian(k: int, x: int, y: int, a: int, p: int) -> Optional[tuple[int, int]]:
    """Return k*(x, y) in affine form, or None for the point at infinity."""
    if k < 0:
        raise ValueError("negative scalar")
    x %= p
    y %= p
    a %= p
    X, Y, Z = 0, 1, 0
    for i in range(k.bit_length() - 1, -1, -1):
        if Z:
            X, Y, Z = _jdouble(X, Y, Z, a, p)
        if (k >> i) & 1:
            X, Y, Z = _jadd_affine(X, Y, Z, x, y, a, p)
    if Z == 0:
        return None
    zinv = pow(Z, -1, p)
    zinv2 = zinv * zinv % p
    return X * zinv2 % p, Y * zinv2 * zinv % p


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _unit(z: int) -> float:
    return (z >> 11) * (1.0 / 9007199254740992.0)


def splitmix_uniforms(key: int, count: int) -> list[float]:
    state = key & _MASK64
    out = []
    for _ in range(count):
        state, z = _splitmix64(state)
        out.append(_unit(z))
    return out


def contention_slots(key: int, busy: float, cw_min: int, cw_max: int) -> tuple[int, int]:
    state = key & _MASK64
    cw = cw_min
    while cw < cw_max:
        state, z = _splitmix64(state)
        if _unit(z) >= busy:
            break
        cw = min(2 * cw + 1, cw_max)
    state, z = _splitmix64(state)
    return int(math.floor(_unit(z) * (cw + 1))), cw


def zoh_running_mean(times: Sequence[float], values: Sequence[float]) -> list[float]:
    if len(times) != len(values):
        raise ValueError("times and values differ in length")
    if not times:
        return []
    t = [float(x) for x in times]
    v = [float(x) for x in values]
    acc = v[0] * t[0] if t[0] > 0.0 else 0.0
    out = [v[0]]
    for i in range(1, len(t)):
        acc = acc + v[i - 1] * (t[i] - t[i - 1])
        out.append(acc / t[i])
    return out
