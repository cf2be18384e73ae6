"""The spherical Eisenstein series E(s, e) by two independent routes.

Lattice route: E(s, e) is the sum over coprime (c, d) modulo sign of
(c^2+d^2)^{-(s+1/2)}.  For large Re s it is summed directly with Moebius
inversion; otherwise the full lattice sum is split with theta inversion
(Ewald) into two rapidly convergent lattice sums of incomplete Gamma
functions, and coprimality is restored by dividing by zeta(2s+1).

Fourier route: constant terms 1 + Lambda(2s)/Lambda(2s+1) plus the
Whittaker expansion 4/Lambda(2s+1) * sum_n n^s sigma_{-2s}(n) K_s(2 pi n).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import specfun as sf
from .errors import NoConvergence, NotConvergent, PoleAt, ZetaDenominatorNearZero
from .specfun import LaurentExpansion

__all__ = [
    "EisensteinValue",
    "eval_lattice",
    "eval_fourier",
    "eisenstein_e",
    "residue_at_half",
    "laurent_at",
    "kronecker_constants",
    "incomplete_gamma_upper",
]


@dataclass(frozen=True)
class EisensteinValue:
    s: complex
    value: complex
    route: str
    tail_bound: float
    method: str = ""


def _out(s, v):
    return v.real if not isinstance(s, complex) and abs(v.imag) < 1e-14 * max(1, abs(v)) else complex(v)


# =============================================================================
# Lattice route
# =============================================================================


def incomplete_gamma_upper(a, x: float, tol: float = 1e-16, max_iter: int = 5000) -> complex:
    """Gamma(a, x) for x > 0 by the Legendre continued fraction (modified
    Lentz).  Used here with x >= pi, where it converges quickly."""
    a = complex(a)
    tiny = 1e-300
    b = x + 1 - a
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - a)
        b += 2
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < tol:
            return cmath.exp(-x + a * math.log(x)) * h
    raise NoConvergence(f"incomplete gamma CF did not converge at a={a}, x={x}")


def _r2_shells(qmax: int) -> dict:
    # Q -> number of (c, d) != 0 with c^2 + d^2 = Q
    shells: dict = {}
    m = math.isqrt(qmax)
    for c in range(-m, m + 1):
        for d in range(-m, m + 1):
            q = c * c + d * d
            if 0 < q <= qmax:
                shells[q] = shells.get(q, 0) + 1
    return shells


_EWALD_QMAX = 40


def _epstein_ewald(sig: complex) -> tuple:
    """Sum over (c,d) != 0 of (c^2+d^2)^{-sig}, with a tail bound."""
    phi = 1 / (sig - 1) - 1 / sig
    for q, mult in sorted(_r2_shells(_EWALD_QMAX).items()):
        x = math.pi * q
        lx = math.log(x)
        phi += mult * (cmath.exp(-sig * lx) * incomplete_gamma_upper(sig, x)
                       + cmath.exp((sig - 1) * lx) * incomplete_gamma_upper(1 - sig, x))
    # Gamma(a, x) <= x^{Re a - 1} e^{-x} (1 + |a|) for the omitted shells
    x0 = math.pi * (_EWALD_QMAX + 1)
    tail = 8 * (1 + abs(sig)) * math.exp(-x0) * x0 ** (abs(sig) + 1)
    pref = cmath.exp(sig * math.log(math.pi)) / sf.gamma(sig)
    return pref * phi, abs(pref) * tail


def _mobius(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, n + 1):
        if is_p[p]:
            is_p[2 * p :: p] = False
            mu[p::p] *= -1
            mu[p * p :: p * p] = 0
    mu[0] = 0
    return mu


def _direct_tail(re_s: float, R: int) -> float:
    return 2 * math.pi * (R - 1) ** (1 - 2 * re_s) / (2 * re_s - 1)


def _lattice_direct(s: complex, R: int) -> complex:
    sig = s + 0.5
    c = np.arange(0, R + 1)
    C, D = np.meshgrid(c, np.arange(-R, R + 1), indexing="ij")
    keep = ((C > 0) | (D > 0)) & (C * C + D * D <= R * R)
    Q = np.sort((C * C + D * D)[keep]).astype(np.float64)
    vals = np.exp(-sig * np.log(Q))
    csum = np.concatenate([[0], np.cumsum(vals)])
    mu = _mobius(R)
    tot = 0j
    for k in range(1, R + 1):
        if mu[k] == 0:
            continue
        # points with |v| <= R/k, i.e. Q <= floor(R/k)^2 (Q is an integer)
        lim = (R * R) // (k * k)
        n = np.searchsorted(Q, lim, side="right")
        tot += mu[k] * cmath.exp(-2 * sig * math.log(k)) * csum[n]
    return tot


def eval_lattice(s, eps: float = 1e-10, method: str = "auto") -> EisensteinValue:
    """Coprime lattice sum of (c^2+d^2)^{-(s+1/2)} modulo sign, Re s > 1/2."""
    sc = complex(s)
    if sc.real <= 0.5:
        raise NotConvergent(f"lattice sum diverges for Re s = {sc.real} <= 1/2")
    R = next((r for r in (100, 200, 400, 800) if _direct_tail(sc.real, r) < eps), None)
    if method == "direct" or (method == "auto" and R is not None):
        R = R or 800
        tail = _direct_tail(sc.real, R)
        return EisensteinValue(s, _out(s, _lattice_direct(sc, R)), "lattice", tail, "direct")
    sig = sc + 0.5
    Z, tail = _epstein_ewald(sig)
    z2 = sf.zeta(2 * sig)
    val = Z / (2 * z2)
    return EisensteinValue(s, _out(s, val), "lattice", tail / abs(2 * z2), "ewald")


# =============================================================================
# Fourier route
# =============================================================================


def _divisor_sigma(n: int, e: complex) -> complex:
    tot = 0j
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            tot += cmath.exp(e * math.log(d))
            q = n // d
            if q != d:
                tot += cmath.exp(e * math.log(q))
    return tot


def eval_fourier(s, eps: float = 1e-12) -> EisensteinValue:
    sc = complex(s)
    if abs(sc - 0.5) < 1e-12:
        raise PoleAt(0.5)
    u = 2 * sc
    xi_den = sf.xi(u + 1)
    if abs(xi_den) < 1e-8:
        raise ZetaDenominatorNearZero(f"Lambda(2s+1) {abs(xi_den):.3g}-close to a zero at s = {s}")
    # Lambda(2s)/Lambda(2s+1) and 1/Lambda(2s+1) through the entire xi
    ratio = sf.xi(u) * (u + 1) / (xi_den * (u - 1))
    inv_lam = (u + 1) * u / (2 * xi_den)
    val = 1 + ratio
    if inv_lam == 0:
        return EisensteinValue(s, _out(s, val), "fourier", 0.0, "whittaker")
    pref = 4 * inv_lam
    real_order = sc.imag == 0
    n = 1
    tail = math.inf
    while True:
        x = 2 * math.pi * n
        k = sf.bessel_k(sc, x)
        term = cmath.exp(sc * math.log(n)) * _divisor_sigma(n, -2 * sc) * k
        val += pref * term
        kr = abs(k) if real_order else abs(sf.bessel_k(sc.real, x))
        bound = abs(pref) * n ** sc.real * abs(_divisor_sigma(n, -2 * sc.real)) * kr
        if n >= 2 and bound < eps / 10:
            tail = 2 * bound
            break
        n += 1
        if 2 * math.pi * n > 200:
            break
    return EisensteinValue(s, _out(s, val), "fourier", tail, "whittaker")


def eisenstein_e(s, eps: float = 1e-12):
    """E(s, e) as a number: Fourier route, or the direct lattice sum for
    Re s >= 3 where it converges fast and K_s leaves the validated range."""
    if complex(s).real >= 3:
        return eval_lattice(s, eps).value
    return eval_fourier(s, eps).value


# =============================================================================
# Laurent data
# =============================================================================


def laurent_at(f: Callable, center, max_order: int = 2, radius: float = 0.1,
               eps: float = 1e-10, min_order: int = -2, max_nodes: int = 1024) -> LaurentExpansion:
    """Laurent coefficients c_{min_order}..c_{max_order} of f around
    ``center`` from the trapezoidal rule on a circle, doubling nodes until
    the coefficients are stable."""
    orders = range(min_order, max_order + 1)
    nodes = 16
    prev = sf.cauchy_coefficients(f, center, orders, radius, nodes)
    while nodes < max_nodes:
        nodes *= 2
        cur = sf.cauchy_coefficients(f, center, orders, radius, nodes)
        err = max(abs(cur[k] - prev[k]) * radius**k for k in orders)
        if err < eps:
            coeffs = {k: (v.real if abs(v.imag) < 10 * eps * radius ** (-k) else v) for k, v in cur.items()}
            return LaurentExpansion(complex(center), coeffs, radius, err)
        prev = cur
    raise NoConvergence(f"Laurent coefficients not stable at {max_nodes} nodes")


def residue_at_half(radius: float = 0.1) -> float:
    """Order -1 coefficient of E(s, e) at s = 1/2 (numerically 3/pi)."""
    lx = laurent_at(lambda z: eval_fourier(z).value, 0.5, 0, radius)
    return float(np.real(lx[-1]))


def kronecker_constants() -> tuple:
    """(C(e), constant term of E(s, e) at s = 1/2).

    C(e) = 2 gamma - 2 log 2 - 4 log eta(i) with eta(i) = Gamma(1/4)/(2 pi^{3/4});
    constant term = (3/pi) C(e) - 36 zeta'(2)/pi^3."""
    import mpmath

    c = sf.named_constants()
    with mpmath.workdps(c.digits):
        ce = 2 * c.euler_gamma - 2 * mpmath.log(2) - 4 * mpmath.log(c.eta_at_i)
        c0 = 3 / c.pi * ce - 36 * c.zeta_prime_2 / c.pi**3
        return float(ce), float(c0)
