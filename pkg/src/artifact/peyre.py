"""Leading constants, Tamagawa numbers and the secondary constants A and C."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import specfun as sf
from .arith import ANTICANONICAL_TAG, NONRIGID_TAG, RIGID_TAG, BundleParams, as_fraction
from .eisenstein import eisenstein_e, laurent_at
from .errors import PoleProximity
from .localint import primes_below

__all__ = [
    "LeadingConstantReport",
    "alpha_invariant",
    "local_density",
    "blowup_point_count",
    "blowup_point_count_bruteforce",
    "tamagawa_anticanonical",
    "leading_constant",
    "manin_constants",
    "manin_constants_mp",
    "manin_constants_rederived_mp",
    "secondary_constant",
    "SECONDARY_ROUTES",
    "manin_constants_laurent",
    "manin_constants_rederived",
    "height_zeta_main_factor",
    "predicted_count",
]


@dataclass
class LeadingConstantReport:
    bundle: BundleParams
    a_L: Fraction
    b_L: int
    c_value: float
    ingredients: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "bundle": {"x": str(self.bundle.x), "y": str(self.bundle.y), "case": self.bundle.case_tag},
            "a_L": str(self.a_L),
            "b_L": self.b_L,
            "c_value": self.c_value,
            "ingredients": self.ingredients,
        }


# =============================================================================
# alpha-invariants and Tamagawa densities
# =============================================================================


def alpha_invariant(bundle: BundleParams) -> Fraction:
    tag = bundle.case_tag
    if tag == ANTICANONICAL_TAG:
        # int_{x >= 0, y >= x} e^{-(4y - x)} dx dy = int_0^inf e^{-3x}/4 dx
        return Fraction(1, 12)
    if tag == RIGID_TAG:
        return 1 / (2 * bundle.x)
    return 1 / (bundle.x + bundle.y)


def local_density(p: int) -> Fraction:
    """(1 - p^-2)(1 - p^-3)/(1 - p^-1)^2 = #X(F_p)/p^3."""
    p = Fraction(p)
    return (1 - p**-2) * (1 - p**-3) / (1 - 1 / p) ** 2


def blowup_point_count(p: int) -> int:
    """#X(F_p): P^3 off the line, plus a P^1 of directions over each point of it."""
    p3 = p**3 + p**2 + p + 1
    line = p + 1
    return p3 - line + line * (p + 1)


def _proj_points(n: int, p: int):
    # normalized representatives of P^{n-1}(F_p): first nonzero coordinate 1
    for lead in range(n):
        for tail in np.ndindex(*([p] * (n - lead - 1))):
            yield (0,) * lead + (1,) + tuple(tail)


def blowup_point_count_bruteforce(p: int) -> int:
    """Points ((a:b:c:d), (u:v)) of P^3 x P^1 over F_p with c v = d u."""
    lines = list(_proj_points(2, p))
    n = 0
    for a, b, c, d in _proj_points(4, p):
        for u, v in lines:
            if (c * v - d * u) % p == 0:
                n += 1
    return n


def tamagawa_anticanonical(P: int) -> float:
    """2 pi^2 prod_{p < P} (1 - p^-2)(1 - p^-3); tends to 12/zeta(3)."""
    ps = primes_below(P).astype(np.float64)
    logs = np.log1p(-(ps**-2)) + np.log1p(-(ps**-3))
    return 2 * math.pi**2 * math.exp(math.fsum(logs))


# =============================================================================
# Leading constants
# =============================================================================


def leading_constant(bundle: BundleParams) -> LeadingConstantReport:
    tag = bundle.case_tag
    x, y = bundle.x, bundle.y
    alpha = alpha_invariant(bundle)
    if tag == ANTICANONICAL_TAG:
        z3 = float(sf.named_constants().zeta3)
        tau = 12 / z3
        c = float(alpha) * tau
        ing = {"alpha": str(alpha), "tamagawa": tau, "archimedean_factor": 2 * math.pi**2}
    elif tag == RIGID_TAG:
        u = float(2 * y / x)
        if abs(u - 1) < 0.05:
            raise PoleProximity(f"2y/x = {u} is close to the pole of Lambda at 1")
        c = 3 / (math.pi * float(x)) * sf.lambda_value(u) / sf.lambda_value(2 + u)
        ing = {"alpha": str(alpha), "lambda_ratio": sf.lambda_value(u) / sf.lambda_value(2 + u)}
    else:
        s = float(3 * x / (x + y)) - 1.5
        if abs(s - 0.5) < 0.05:
            raise PoleProximity(f"E(s, e) evaluated at s = {s}, close to its pole")
        e_val = float(eisenstein_e(s))
        c = e_val / (float(x + y) * sf.lambda_value(3.0))
        ing = {"alpha": str(alpha), "eisenstein_s": s, "eisenstein_value": e_val,
               "lambda_3": sf.lambda_value(3.0)}
    return LeadingConstantReport(bundle, bundle.a_L, bundle.b_L, c, ing)


# =============================================================================
# Secondary constants
# =============================================================================


def _consts():
    c = sf.named_constants()
    return c, mpmath.workdps(c.digits)


def manin_constants_mp() -> tuple:
    """(C, A) as mpmath numbers from the closed forms

        zeta(3) C = 5 gamma - 3 log 2 + (3/4) log pi - log Gamma(1/4)
                    - 24 zeta'(2)/pi^2 - zeta'(3)/zeta(3) - 4,

    and A = C + 1/zeta(3) (the same expression with -3)."""
    c, ctx = _consts()
    with ctx:
        core = (5 * c.euler_gamma - 3 * mpmath.log(2) + mpmath.mpf(3) / 4 * mpmath.log(c.pi)
                - mpmath.log(c.gamma_quarter) - 24 * c.zeta_prime_2 / c.pi**2
                - c.zeta_prime_3 / c.zeta3)
        C = (core - 4) / c.zeta3
        return C, C + 1 / c.zeta3


def manin_constants() -> tuple:
    C, A = manin_constants_mp()
    return float(C), float(A)


def height_zeta_main_factor(w):
    """Lambda(3w-2)/Lambda(3w) * E(2w - 3/2, e)."""
    return sf.lambda_value(3 * w - 2) / sf.lambda_value(3 * w) * eisenstein_e(2 * w - 1.5)


def manin_constants_laurent(radius: float = 0.1) -> tuple:
    """(C, A, c_{-2}) with A the (w-1)^{-1} coefficient of
    Lambda(3w-2)/Lambda(3w) E(2w-3/2, e) at w = 1 and C = A - c_{-2}."""
    lx = laurent_at(height_zeta_main_factor, 1.0, 0, radius)
    A = float(np.real(lx[-1]))
    c2 = float(np.real(lx[-2]))
    return A - c2, A, c2


def manin_constants_rederived_mp() -> tuple:
    """(C, A) from multiplying out the two Laurent series by hand:

        zeta(3) A = 7 gamma + 4 log 2 + 6 log pi - 8 log Gamma(1/4)
                    - 24 zeta'(2)/pi^2 - 3 zeta'(3)/zeta(3) - 3.

    This is what the product of the expansions of Lambda(3w-2)/Lambda(3w)
    and E(2w-3/2, e) at w = 1 gives, and it agrees with the Laurent route."""
    c, ctx = _consts()
    with ctx:
        za = (7 * c.euler_gamma + 4 * mpmath.log(2) + 6 * mpmath.log(c.pi)
              - 8 * mpmath.log(c.gamma_quarter) - 24 * c.zeta_prime_2 / c.pi**2
              - 3 * c.zeta_prime_3 / c.zeta3 - 3)
        A = za / c.zeta3
        return A - 1 / c.zeta3, A


def manin_constants_rederived() -> tuple:
    C, A = manin_constants_rederived_mp()
    return float(C), float(A)


SECONDARY_ROUTES = ("closed-form", "laurent", "rederived")


@functools.lru_cache(maxsize=None)
def secondary_constant(route: str = "closed-form") -> float:
    if route == "closed-form":
        return manin_constants()[0]
    if route == "laurent":
        return manin_constants_laurent()[0]
    if route == "rederived":
        return manin_constants_rederived()[0]
    raise ValueError(f"unknown secondary route {route!r}")


def predicted_count(bundle: BundleParams, B, secondary: str = "closed-form") -> float:
    """Main term of N_L(B).  Anticanonical line: with H_L = H_{-K}^{x/2},
    N_L(B) = N_{-K}(B^{2/x}) ~ T log T / zeta(3) + C T at T = B^{2/x}.
    Otherwise (c/a) B^a for the simple pole at a = a(L) with residue c."""
    B = float(as_fraction(B))
    if not B > 1:
        raise ValueError("need B > 1")
    if bundle.case_tag == ANTICANONICAL_TAG:
        T = B ** float(2 / bundle.x)
        z3 = float(sf.named_constants().zeta3)
        return T * math.log(T) / z3 + secondary_constant(secondary) * T
    rep = leading_constant(bundle)
    a = float(rep.a_L)
    return rep.c_value / a * B**a
