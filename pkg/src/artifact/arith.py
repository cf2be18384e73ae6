"""Rational points of PGL2(Q) and their heights.

A point is a primitive integer quadruple (a, b, c, d) taken up to sign,
with det = ad - bc != 0.  For L = x*D + y*E the product of the local
heights over all places collapses to

    H_L = Sigma^{(x+y)/2} * r'^{(x-y)/2},   Sigma = a^2+b^2+c^2+d^2,
                                             r' = (c^2+d^2) / gcd(c,d)^2,

because the finite part of H_E is g = gcd(c,d) and that of H_D is |det|/g,
while the archimedean parts are sqrt(Sigma/r) and sqrt(Sigma*r)/|det|.
The tests check this identity against the place-by-place product.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import NamedTuple

import mpmath

from .errors import AllZero, BoundaryPoint, NotBig, UndecidableAtPrecision

__all__ = [
    "INF",
    "PrimitivePoint",
    "BundleParams",
    "HeightParams",
    "HeightToken",
    "canonicalize",
    "local_height",
    "global_height",
    "height_lt",
    "as_fraction",
    "ANTICANONICAL",
]

INF = math.inf

ANTICANONICAL_TAG = "anticanonical-line"
RIGID_TAG = "rigid"
NONRIGID_TAG = "non-rigid"


def as_fraction(v) -> Fraction:
    """Exact rational from int, Fraction, decimal string or float (floats go
    through their shortest repr, so 2.8 means 14/5)."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"not a finite number: {v}")
        return Fraction(repr(v))
    return Fraction(str(v).strip())


# =============================================================================
# Types
# =============================================================================


@dataclass(frozen=True, order=True)
class PrimitivePoint:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        q = (self.a, self.b, self.c, self.d)
        if reduce(math.gcd, q) != 1:
            raise ValueError(f"{q} is not primitive")
        if self.a * self.d - self.b * self.c == 0:
            raise BoundaryPoint(f"{q} has det 0")
        first = next(v for v in q if v != 0)
        if first < 0:
            raise ValueError(f"{q} is not sign-normalized")

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def sigma(self) -> int:
        return self.a**2 + self.b**2 + self.c**2 + self.d**2

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def g(self) -> int:
        return math.gcd(self.c, self.d)

    @property
    def r(self) -> int:
        return self.c**2 + self.d**2

    @property
    def r_prime(self) -> int:
        return self.r // (self.g * self.g)


@dataclass(frozen=True)
class BundleParams:
    """L = x*D + y*E with its adjoint invariants."""

    x: Fraction
    y: Fraction

    def __init__(self, x, y):
        x = as_fraction(x)
        y = as_fraction(y)
        if not (x > 0 and x + y > 0):
            raise NotBig(f"L = {x} D + {y} E is not big")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def case_tag(self) -> str:
        t = 2 * self.y - self.x
        if t > 0:
            return RIGID_TAG
        if t < 0:
            return NONRIGID_TAG
        return ANTICANONICAL_TAG

    @property
    def a_L(self) -> Fraction:
        if self.case_tag == NONRIGID_TAG:
            return 3 / (self.x + self.y)
        return 2 / self.x

    @property
    def b_L(self) -> int:
        return 2 if self.case_tag == ANTICANONICAL_TAG else 1

    @property
    def exponents(self) -> tuple:
        """(x+y, x-y): H^2 = Sigma^{x+y} r'^{x-y}."""
        return (self.x + self.y, self.x - self.y)

    def __str__(self):
        return f"{self.x},{self.y}"


ANTICANONICAL = BundleParams(2, 1)


@dataclass(frozen=True)
class HeightParams:
    s: complex
    w: complex


# =============================================================================
# Construction
# =============================================================================


def canonicalize(quad) -> PrimitivePoint:
    a, b, c, d = (int(v) for v in quad)
    g = reduce(math.gcd, (a, b, c, d))
    if g == 0:
        raise AllZero("all entries are zero")
    a, b, c, d = a // g, b // g, c // g, d // g
    if a * d - b * c == 0:
        raise BoundaryPoint(f"({a},{b},{c},{d}) lies on the boundary divisor")
    first = next(v for v in (a, b, c, d) if v != 0)
    if first < 0:
        a, b, c, d = -a, -b, -c, -d
    return PrimitivePoint(a, b, c, d)


# =============================================================================
# Local and global heights
# =============================================================================


def _vp(n: int, p: int) -> int:
    if n == 0:
        return math.inf
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _abs_p(n: int, p: int) -> Fraction:
    v = _vp(n, p)
    return Fraction(0) if v == math.inf else Fraction(1, p**v)


def local_height(pt: PrimitivePoint, place, divisor: str):
    """H_{E,v} or H_{D,v}.  Finite places return an exact power of p as a
    Fraction; the real place returns a float."""
    a, b, c, d = pt.entries
    if divisor not in ("E", "D"):
        raise ValueError("divisor must be 'E' or 'D'")
    if place == INF or place == "inf":
        full = math.sqrt(pt.sigma)
        cd = math.sqrt(pt.r)
        if divisor == "E":
            return full / cd
        return full * cd / abs(pt.det)
    p = int(place)
    h2 = max(_abs_p(v, p) for v in (a, b, c, d))
    h1 = max(_abs_p(c, p), _abs_p(d, p))
    if divisor == "E":
        return h2 / h1
    return h2 * h1 / _abs_p(pt.det, p)


class HeightToken(NamedTuple):
    """Exact data behind H: H^2 = sigma^{x+y} * r_prime^{x-y}."""

    sigma: int
    r_prime: int
    x: Fraction
    y: Fraction

    def log_h(self) -> float:
        p1, p2 = self.x + self.y, self.x - self.y
        return 0.5 * (float(p1) * math.log(self.sigma) + float(p2) * math.log(self.r_prime))

    def lt(self, B) -> bool:
        return _token_lt(self, as_fraction(B))


class GlobalHeight(NamedTuple):
    value: float
    token: HeightToken


def global_height(pt: PrimitivePoint, L: BundleParams) -> GlobalHeight:
    tok = HeightToken(pt.sigma, pt.r_prime, L.x, L.y)
    return GlobalHeight(math.exp(tok.log_h()), tok)


_EXACT_DENOMINATOR_CAP = 64


def _exact_lt(sigma: int, rp: int, p1: Fraction, p2: Fraction, B: Fraction) -> bool:
    # sigma^{p1 D} rp^{p2 D} < B^{2D} with D clearing p1, p2
    D = math.lcm(p1.denominator, p2.denominator)
    e1 = int(p1 * D)
    e2 = int(p2 * D)
    u, v = B.numerator, B.denominator
    lhs_num, rhs_num = 1, 1
    # move negative powers across
    if e1 >= 0:
        lhs_num *= sigma**e1
    else:
        rhs_num *= sigma ** (-e1)
    if e2 >= 0:
        lhs_num *= rp**e2
    else:
        rhs_num *= rp ** (-e2)
    return lhs_num * v ** (2 * D) < rhs_num * u ** (2 * D)


_IV_LOCK = threading.Lock()


def _interval_lt(sigma, rp, p1, p2, B, max_prec=4096) -> bool:
    iv = mpmath.iv
    prec = 64
    with _IV_LOCK:
        saved = iv.prec
        try:
            while prec <= max_prec:
                iv.prec = prec
                lhs = iv.mpf(p1.numerator) / p1.denominator * iv.log(sigma)
                lhs += iv.mpf(p2.numerator) / p2.denominator * iv.log(rp)
                rhs = 2 * (iv.log(B.numerator) - iv.log(B.denominator))
                if lhs.b < rhs.a:
                    return True
                if lhs.a >= rhs.b:
                    return False
                prec *= 2
        finally:
            iv.prec = saved
    raise UndecidableAtPrecision(f"cannot decide H < {B} at {max_prec} bits")


def _token_lt(tok: HeightToken, B: Fraction) -> bool:
    if B <= 0:
        return False
    p1, p2 = tok.x + tok.y, tok.x - tok.y
    D = math.lcm(p1.denominator, p2.denominator)
    if D <= _EXACT_DENOMINATOR_CAP:
        return _exact_lt(tok.sigma, tok.r_prime, p1, p2, B)
    return _interval_lt(tok.sigma, tok.r_prime, p1, p2, B)


def height_lt(pt: PrimitivePoint, L: BundleParams, B) -> bool:
    """H_L(pt) < B, decided exactly for moderate denominators of x, y and by
    interval arithmetic with precision escalation otherwise."""
    return _token_lt(HeightToken(pt.sigma, pt.r_prime, L.x, L.y), as_fraction(B))


def height_lt_interval(pt: PrimitivePoint, L: BundleParams, B, max_prec=4096) -> bool:
    """The floating path on its own (used for cross-checks)."""
    B = as_fraction(B)
    return _interval_lt(pt.sigma, pt.r_prime, L.x + L.y, L.x - L.y, B, max_prec)
