"""Brute-force group oracle for tiny curves and the crypto self-test suite.

The oracle never calls ``point_add`` or the kernels: it enumerates the curve
and finds the third intersection of each chord or tangent by scanning the
enumerated points for collinearity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from convergelab.crypto import ec
from convergelab.crypto.ec import CurveParams, Point


def enumerate_points(c: CurveParams) -> list[Point]:
    pts: list[Point] = [None]
    for x in range(c.p):
        rhs = (x**3 + c.a * x + c.b) % c.p
        for y in range(c.p):
            if y * y % c.p == rhs:
                pts.append((x, y))
    return pts


def _on_line(pt, through, slope, p):
    return (pt[1] - through[1] - slope * (pt[0] - through[0])) % p == 0


def oracle_add(P: Point, Q: Point, c: CurveParams, points: list[Point]) -> Point:
    p = c.p
    if P is None:
        return Q
    if Q is None:
        return P
    if P[0] == Q[0] and (P[1] + Q[1]) % p == 0:
        return None
    affine = [pt for pt in points if pt is not None]
    if P == Q:
        slope = (3 * P[0] ** 2 + c.a) * pow(2 * P[1], -1, p) % p
        hits = {pt for pt in affine if _on_line(pt, P, slope, p)}
        others = hits - {P}
        third = others.pop() if others else P
    else:
        slope = (Q[1] - P[1]) * pow(Q[0] - P[0], -1, p) % p
        hits = {pt for pt in affine if _on_line(pt, P, slope, p)}
        others = hits - {P, Q}
        if others:
            third = others.pop()
        else:
            # line meets the curve twice at one of P, Q: it is tangent there
            tangent_at_p = (3 * P[0] ** 2 + c.a) % p == (2 * P[1] * slope) % p
            third = P if tangent_at_p else Q
    return (third[0], (-third[1]) % p)


@dataclass
class ToyGroupOracle:
    curve: CurveParams
    points: list[Point] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.points:
            self.points = enumerate_points(self.curve)

    def add(self, P: Point, Q: Point) -> Point:
        return oracle_add(P, Q, self.curve, self.points)

    def multiples(self, P: Point, upto: int) -> list[Point]:
        """[1P, 2P, ..., upto*P] by repeated oracle addition."""
        out, acc = [], None
        for _ in range(upto):
            acc = self.add(acc, P)
            out.append(acc)
        return out


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def run_selftests(curve: CurveParams = ec.P256, pairs: int = 1000, seed: int = 7) -> list[CheckResult]:
    """Group laws and oracle equivalence on the toy curve, ECDH symmetry on ``curve``."""
    toy = ec.TOY_CURVE
    oracle = ToyGroupOracle(toy)
    results = []

    results.append(CheckResult("toy group order", len(oracle.points) == toy.n, f"{len(oracle.points)} points"))

    table_ok = all(
        ec.point_add(P, Q, toy) == oracle.add(P, Q) for P in oracle.points for Q in oracle.points
    )
    results.append(CheckResult("point_add matches oracle table", table_ok))

    mults = oracle.multiples(toy.G, toy.n - 1)
    mul_ok = all(ec.scalar_mul(k, toy.G, toy) == mults[k - 1] for k in range(1, toy.n))
    results.append(CheckResult("scalar_mul matches repeated addition", mul_ok))

    rng = random.Random(seed)
    laws_ok = True
    for _ in range(200):
        P, Q, R = (rng.choice(oracle.points) for _ in range(3))
        lhs = ec.point_add(ec.point_add(P, Q, toy), R, toy)
        rhs = ec.point_add(P, ec.point_add(Q, R, toy), toy)
        if lhs != rhs or ec.point_add(P, None, toy) != P or ec.point_add(P, ec.negate(P, toy), toy) is not None:
            laws_ok = False
            break
    results.append(CheckResult("toy group laws", laws_ok))

    sym_ok = True
    for _ in range(pairs):
        a, b = curve.random_scalar(rng), curve.random_scalar(rng)
        aP, bP = ec.public_key(a, curve), ec.public_key(b, curve)
        if ec.ecdh_shared(a, bP, curve) != ec.ecdh_shared(b, aP, curve):
            sym_ok = False
            break
    results.append(CheckResult(f"ECDH symmetry on {curve.name or 'curve'}", sym_ok, f"{pairs} pairs"))
    results.append(CheckResult(f"{curve.name or 'curve'} order check", curve.check_order()))
    return results
