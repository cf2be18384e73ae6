"""Special functions: Gamma, zeta, the completed zeta function and K-Bessel.

Double precision routines are self-contained (Lanczos for Gamma,
Euler-Maclaurin for zeta and zeta', trapezoidal quadrature of the cosh
integral for K).  The same Euler-Maclaurin code runs on mpmath numbers to
produce the cached high precision constants; mpmath is used there purely
as a multiprecision arithmetic.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .errors import OutOfValidatedRange, PoleAt

__all__ = [
    "Precision",
    "NamedConstants",
    "LaurentExpansion",
    "gamma",
    "loggamma",
    "zeta",
    "zeta_prime",
    "lambda_completed",
    "lambda_value",
    "lambda_regular",
    "lambda_laurent",
    "xi",
    "bessel_k",
    "cauchy_coefficients",
    "named_constants",
]


@dataclass(frozen=True)
class Precision:
    target_eps: float = 1e-12
    working_digits: int = 25

    def __post_init__(self):
        if not self.target_eps > 0:
            raise ValueError("target_eps must be positive")
        if self.working_digits < 1 or 10.0 ** (-self.working_digits) >= self.target_eps / 10:
            raise ValueError("working_digits too small for target_eps")


DEFAULT_PRECISION = Precision()


def _is_real(z) -> bool:
    return not isinstance(z, complex)


def _ret(z, value):
    # real input, real output when the imaginary part is rounding noise
    if _is_real(z):
        return value.real
    return complex(value)


# =============================================================================
# Gamma
# =============================================================================

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _check_gamma_pole(z):
    zc = complex(z)
    if zc.imag == 0 and zc.real <= 0 and zc.real == math.floor(zc.real):
        raise PoleAt(int(zc.real))


def _loggamma_right(z: complex) -> complex:
    # Lanczos, valid for Re z >= 1/2
    z = z - 1
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def loggamma(z):
    """log Gamma(z).  Principal continuous branch for Re z >= 1/2; for
    Re z < 1/2 the reflection formula is used and the branch is not tracked."""
    _check_gamma_pole(z)
    zc = complex(z)
    if zc.real >= 0.5:
        return _ret(z, _loggamma_right(zc))
    val = math.log(math.pi) - cmath.log(cmath.sin(math.pi * zc)) - _loggamma_right(1 - zc)
    return complex(val)


def gamma(z):
    """Gamma(z) for complex z, |z| <= 100."""
    _check_gamma_pole(z)
    zc = complex(z)
    if zc.real >= 0.5:
        val = cmath.exp(_loggamma_right(zc))
    else:
        val = math.pi / (cmath.sin(math.pi * zc) * cmath.exp(_loggamma_right(1 - zc)))
    return _ret(z, val)


# =============================================================================
# Zeta by Euler-Maclaurin
# =============================================================================


@lru_cache(maxsize=None)
def _bernoulli(n: int) -> tuple:
    """B_0..B_n as Fractions (B_1 = -1/2)."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        binom = 1
        for k in range(m):
            acc += binom * B[k]
            binom = binom * (m + 1 - k) // (k + 1)
        B.append(-acc / (m + 1))
    return tuple(B)


@lru_cache(maxsize=None)
def _em_coefficients(M: int) -> tuple:
    """B_{2k}/(2k)! for k = 1..M."""
    B = _bernoulli(2 * M)
    return tuple(B[2 * k] / math.factorial(2 * k) for k in range(1, M + 1))


def _em_zeta(s, N: int, M: int, exp, log, conv):
    """(zeta(s), zeta'(s)) by Euler-Maclaurin with N direct terms and M
    Bernoulli corrections.  ``exp``, ``log`` and ``conv`` fix the arithmetic."""
    z = 0
    dz = 0
    for n in range(1, N):
        ln = log(n)
        t = exp(-s * ln)
        z += t
        dz -= ln * t
    LN = log(N)
    Ns = exp(-s * LN)
    sm1 = s - 1
    z += N * Ns / sm1 + Ns / 2
    dz += -LN * N * Ns / sm1 - N * Ns / (sm1 * sm1) - LN * Ns / 2
    P = s
    dP = 1
    Npow = Ns / N
    NN = N * N
    for k, c in enumerate(_em_coefficients(M), start=1):
        c = conv(c)
        z += c * P * Npow
        dz += c * (dP - LN * P) * Npow
        for j in (2 * k - 1, 2 * k):
            dP = dP * (s + j) + P
            P = P * (s + j)
        Npow = Npow / NN
    return z, dz


def _em_size(s, M: int, ratio: float) -> int:
    # the Bernoulli series behaves like ((|s|+2M)/(2 pi N))^{2M}
    return max(20, int(math.ceil((abs(complex(s)) + 2 * M) / (2 * math.pi * ratio))) + 1)


def _zeta_pair(s):
    if complex(s) == 1:
        raise PoleAt(1)
    M = 14
    N = _em_size(s, M, 0.25)
    return _em_zeta(complex(s), N, M, cmath.exp, math.log, float)


def zeta(s):
    """Riemann zeta(s), s != 1.  Intended for Re s > -1; the completed
    function below uses the functional equation further left."""
    return _ret(s, _zeta_pair(s)[0])


def zeta_prime(s):
    """zeta'(s) by the term-wise differentiated Euler-Maclaurin formula."""
    return _ret(s, _zeta_pair(s)[1])


def zeta_mp(s, digits: int = 25):
    """(zeta(s), zeta'(s)) as mpmath numbers at ``digits`` working digits."""
    with mpmath.workdps(digits + 10):
        M = max(20, digits)
        N = _em_size(s, M, 0.2)
        conv = lambda c: mpmath.mpf(c.numerator) / c.denominator
        z, dz = _em_zeta(mpmath.mpmathify(s), N, M, mpmath.exp, mpmath.log, conv)
        return +z, +dz


# =============================================================================
# Completed zeta
# =============================================================================


@dataclass
class LaurentExpansion:
    """Coefficients c_k of sum_k c_k (z - center)^k."""

    center: complex
    coefficients: dict = field(default_factory=dict)
    radius_used: float = 0.0
    error_estimate: float = 0.0

    def __getitem__(self, k: int) -> complex:
        return self.coefficients.get(k, 0.0)

    def evaluate(self, z) -> complex:
        h = complex(z) - self.center
        return sum(c * h**k for k, c in self.coefficients.items())


def cauchy_coefficients(f, center, orders, radius: float, nodes: int) -> dict:
    """Trapezoidal rule for (1/2 pi i) \\oint f(z) (z - center)^{-k-1} dz."""
    center = complex(center)
    theta = 2 * math.pi * np.arange(nodes) / nodes
    u = np.exp(1j * theta)
    vals = np.array([complex(f(center + radius * ui)) for ui in u])
    out = {}
    for k in orders:
        out[k] = complex(np.mean(vals * u ** (-k)) * radius ** (-k))
    return out


def lambda_value(s):
    """Lambda(s) = pi^{-s/2} Gamma(s/2) zeta(s), using Lambda(s) = Lambda(1-s)
    for Re s < 1/2."""
    sc = complex(s)
    if sc == 0 or sc == 1:
        raise PoleAt(int(sc.real))
    if sc.real < 0.5:
        sc = 1 - sc
    val = cmath.exp(-0.5 * sc * math.log(math.pi)) * gamma(sc / 2) * _zeta_pair(sc)[0]
    return _ret(s, val)


_REG_RADIUS = 0.5
_REG_NODES = 64
_reg_lock = threading.Lock()
_reg_cache: dict = {}


def _regular_taylor() -> dict:
    # Taylor coefficients at 1 of R(s) = Lambda(s) + 1/s - 1/(s-1), entire
    with _reg_lock:
        if not _reg_cache:
            f = lambda z: lambda_value(z) + 1 / z - 1 / (z - 1)
            _reg_cache.update(cauchy_coefficients(f, 1.0, range(_REG_NODES // 2), _REG_RADIUS, _REG_NODES))
        return _reg_cache


def lambda_regular(s):
    """R(s) = Lambda(s) + 1/s - 1/(s-1), entire and symmetric under s -> 1-s.
    Near the poles the cached Taylor series at s = 1 is used, which avoids
    the cancellation between Lambda and its polar part."""
    sc = complex(s)
    if abs(sc - 1) < 0.25 or abs(sc) < 0.25:
        h = sc - 1 if abs(sc - 1) < 0.25 else -sc
        coeffs = _regular_taylor()
        val = 0j
        for k in sorted(coeffs, reverse=True):
            val = val * h + coeffs[k]
        return _ret(s, val)
    return _ret(s, lambda_value(sc) + 1 / sc - 1 / (sc - 1))


def xi(s):
    """xi(s) = s(s-1)Lambda(s)/2, entire, xi(0) = xi(1) = 1/2."""
    sc = complex(s)
    return _ret(s, 0.5 * (sc * (sc - 1) * lambda_regular(sc) + 1))


def lambda_laurent(pole: int, max_order: int = 6) -> LaurentExpansion:
    """Laurent data of Lambda at s = 0 or s = 1 (residues -1 and +1)."""
    if pole not in (0, 1):
        raise ValueError("Lambda has poles only at 0 and 1")
    r = _regular_taylor()
    coeffs = {-1: 1.0 if pole == 1 else -1.0}
    for k in range(max_order + 1):
        if pole == 1:
            # -1/s = -sum (-1)^k (s-1)^k
            coeffs[k] = r[k] - (-1) ** k
        else:
            # 1/(s-1) = -sum s^k and R(s) = R(1-s)
            coeffs[k] = (-1) ** k * r[k] - 1
    return LaurentExpansion(complex(pole), coeffs, _REG_RADIUS, 1e-13)


def lambda_completed(s, pole_window: float = 0.05):
    """Lambda(s) away from {0, 1}; within ``pole_window`` of a pole the
    Laurent expansion there is returned instead of a value."""
    sc = complex(s)
    for p in (0, 1):
        if abs(sc - p) < pole_window:
            return lambda_laurent(p)
    return lambda_value(s)


# =============================================================================
# K-Bessel
# =============================================================================


def _bessel_cutoff(re_nu: float, x: float) -> float:
    # smallest T with x (cosh T - 1) - |Re nu| T >= 45
    T = 1.0
    while x * (math.cosh(T) - 1) - abs(re_nu) * T < 45:
        T += 0.25
    return T


def bessel_k(order, x: float, eps: float = 1e-15, check_range: bool = True):
    """K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt for x > 0.

    Trapezoidal rule with step halving.  The integrand is analytic in a strip,
    so the rule converges geometrically; the stopping tolerance is relative
    to int |integrand|, which for large |Im nu| exceeds |K_nu(x)|."""
    nu = complex(order)
    if not x > 0:
        raise ValueError("bessel_k requires x > 0")
    if check_range and (abs(nu.real) > 10 or abs(nu.imag) > 50 or not (0.01 <= x <= 200)):
        raise OutOfValidatedRange(f"K_{order}({x}) outside validated range")
    T = _bessel_cutoff(nu.real, x)
    h = 0.25
    prev = None
    while True:
        t = np.arange(0.0, T + h / 2, h)
        f = np.exp(-x * np.cosh(t)) * np.cosh(nu * t)
        val = h * (f.sum() - 0.5 * f[0])
        scale = h * np.abs(f).sum()
        if prev is not None and abs(val - prev) <= eps * max(scale, 1e-300):
            break
        if h < 1.0 / 1024:
            break
        prev = val
        h /= 2
    return _ret(order, complex(val))


# =============================================================================
# Named constants
# =============================================================================


@dataclass(frozen=True)
class NamedConstants:
    """Constants as mpmath numbers at the working precision."""

    digits: int
    pi: object
    euler_gamma: object
    zeta2: object
    zeta3: object
    zeta_prime_2: object
    zeta_prime_3: object
    gamma_quarter: object
    eta_at_i: object
    catalan: object

    def as_floats(self) -> dict:
        names = ("pi", "euler_gamma", "zeta2", "zeta3", "zeta_prime_2", "zeta_prime_3",
                 "gamma_quarter", "eta_at_i", "catalan")
        return {n: float(getattr(self, n)) for n in names}


def _agm(a, b, tol):
    while abs(a - b) > tol:
        a, b = (a + b) / 2, mpmath.sqrt(a * b)
    return a


_const_lock = threading.Lock()
_const_cache: dict = {}


def named_constants(precision: Precision = DEFAULT_PRECISION) -> NamedConstants:
    digits = precision.working_digits
    with _const_lock:
        if digits in _const_cache:
            return _const_cache[digits]
        with mpmath.workdps(digits + 10):
            pi = +mpmath.pi
            z2, zp2 = zeta_mp(2, digits)
            z3, zp3 = zeta_mp(3, digits)
            # Gamma(1/4)^2 = (2 pi)^{3/2} / AGM(1, sqrt 2)
            agm = _agm(mpmath.mpf(1), mpmath.sqrt(2), mpmath.mpf(10) ** (-(digits + 8)))
            g4 = mpmath.sqrt((2 * pi) ** mpmath.mpf(1.5) / agm)
            eta = g4 / (2 * pi ** mpmath.mpf(0.75))
            c = NamedConstants(
                digits=digits,
                pi=pi,
                euler_gamma=+mpmath.euler,
                zeta2=z2,
                zeta3=z3,
                zeta_prime_2=zp2,
                zeta_prime_3=zp3,
                gamma_quarter=g4,
                eta_at_i=eta,
                catalan=+mpmath.catalan,
            )
        _const_cache[digits] = c
        return c
