"""Local height integrals on PGL2(Q_v) and their exact oracles.

In Iwasawa coordinates g = n(x) a(t) k the height integrand is

    H(g)^{-1} = |t|^s max{1, |t|, |x|}^{-(s+w)}       (q-adic)
    H(g)^{-1} = |t|^s (1 + t^2 + x^2)^{-(s+w)/2}      (real)

and dg = |t|^{-1} dt^x dx, with vol(G(Z_p)) = 1.  At a finite place the
integrand is constant on the shells t = p^m u, |x| = p^j, so every
integral below reduces to a sum over (m, j) of shell volumes times
character integrals.  Those sums are evaluated exactly: finitely many shells
carry the character, and the remaining tails are geometric series whose
ratios are tested for convergence before summing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import specfun as sf
from .errors import (InvalidSatake, PoleProximity, QuadratureBudgetExceeded,
                     TruncationNotProvablyComplete)

__all__ = [
    "SatakeParam",
    "ShellTruncation",
    "whittaker_unramified",
    "hecke_l",
    "hecke_l_identity",
    "height_integral_nonarch",
    "height_integral_arch",
    "height_integral_arch_quadrature",
    "height_integral_twisted",
    "character_shell_integral",
    "oracle_nonarch",
    "j_cuspidal",
    "j_eisenstein",
    "whittaker_arch",
    "j_arch_quadrature",
    "z_res",
    "euler_product_check",
    "primes_below",
]

POLE_TOL = 1e-10


@dataclass(frozen=True)
class SatakeParam:
    """chi = chi(varpi) for Ind(chi, chi^{-1}) at q, with q^{-delta} <= |chi| <= q^{delta}."""

    chi: complex
    q: int
    delta: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "chi", complex(self.chi))
        if self.chi == 0:
            raise InvalidSatake("chi must be nonzero")
        if not 0 < self.delta < 0.5:
            raise InvalidSatake("delta must lie in (0, 1/2)")
        lo, hi = self.q ** (-self.delta), self.q**self.delta
        if not lo * (1 - 1e-12) <= abs(self.chi) <= hi * (1 + 1e-12):
            raise InvalidSatake(f"|chi| = {abs(self.chi)} outside [{lo}, {hi}]")

    @property
    def degenerate(self) -> bool:
        return abs(self.chi - 1 / self.chi) < 1e-3


@dataclass(frozen=True)
class ShellTruncation:
    m_range: tuple
    j_range: tuple


def primes_below(n: int) -> np.ndarray:
    if n <= 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n - 1) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0]


def _pw(q, e):
    """q**e, exact for integer e."""
    if isinstance(e, Fraction) and e.denominator == 1:
        e = int(e)
    if isinstance(e, int):
        return Fraction(q) ** e
    if isinstance(e, float) and e.is_integer():
        return Fraction(q) ** int(e)
    return cmath.exp(complex(e) * math.log(q))


def _check_den(v, what):
    if abs(v) < POLE_TOL:
        raise PoleProximity(f"{what} vanishes")


# =============================================================================
# Unramified Whittaker function and the Hecke identity
# =============================================================================


def whittaker_unramified(sp: SatakeParam, m: int) -> complex:
    """W(diag(varpi^m, 1)) normalized by W(e) = 1."""
    if m < 0:
        return 0.0
    chi = sp.chi
    scale = sp.q ** (-m / 2)
    if sp.degenerate:
        # geometric-sum form; equals (m+1)(+-1)^m q^{-m/2} at chi = +-1
        return scale * sum(chi ** (m - 2 * k) for k in range(m + 1))
    return scale * (chi ** (m + 1) - chi ** (-m - 1)) / (chi - 1 / chi)


def hecke_l(sp: SatakeParam, s) -> complex:
    q_s = sp.q ** (-complex(s))
    return 1 / ((1 - sp.chi * q_s) * (1 - q_s / sp.chi))


def hecke_l_identity(sp: SatakeParam, s, M: int) -> complex:
    """Partial sum sum_{m=0}^{M} q^{m(1/2 - s)} W(varpi^m)."""
    s = complex(s)
    return sum(sp.q ** (m * (0.5 - s)) * whittaker_unramified(sp, m) for m in range(M + 1))


# =============================================================================
# Plain and twisted height integrals
# =============================================================================


def _zeta_p(p, u):
    den = 1 - _pw(p, -u)
    _check_den(den, f"1 - {p}^(-({u}))")
    return 1 / den


def height_integral_nonarch(p: int, s, w):
    """(1 - p^{-(s+w)}) / ((1 - p^{-(s-1)})(1 - p^{-w})); exact for integer s, w."""
    return height_integral_twisted(p, s, w, 0)


def height_integral_arch(s, w) -> complex:
    """sqrt(pi) Gamma((s-1)/2) Gamma(w/2) / Gamma((s+w)/2)."""
    return height_integral_twisted(math.inf, s, w, 0)


def height_integral_arch_quadrature(s: float, w: float, eps: float = 1e-11) -> float:
    """2-D adaptive quadrature of int int (t^2+x^2+1)^{-(s+w)/2} |t|^{s-1} dt^x dx
    over R^x x R, as an independent check of the Gamma formula."""
    from scipy import integrate

    s = float(s)
    w = float(w)
    if not (s > 1 and w > 0):
        raise ValueError("need s > 1, w > 0")
    u = (s + w) / 2
    opts = {"epsabs": eps, "epsrel": eps, "limit": 200}
    f = lambda x, t: t ** (s - 2) * (1 + t * t + x * x) ** (-u)  # noqa: E731
    val = err = 0.0
    # split at 1 so that the endpoint behaviour at t = 0 and the algebraic tails are separate
    for tr in ((0, 1), (1, math.inf)):
        for xr in ((0, 1), (1, math.inf)):
            v, e = integrate.nquad(f, [xr, tr], opts=[opts, opts])
            val += v
            err += e
    if err > 100 * eps * max(1.0, abs(val)):
        raise QuadratureBudgetExceeded(f"error estimate {err:.3g} over budget")
    # four quadrants by symmetry in t and x
    return 4 * val


def height_integral_twisted(place, s, w, tau):
    """Height integral against |t|^tau.  Equals the plain integral at
    (s + tau, w - tau) with s + w unchanged."""
    if place == math.inf or place == "inf":
        a = (complex(s) + complex(tau) - 1) / 2
        b = (complex(w) - complex(tau)) / 2
        for v, name in ((a, "(s+tau-1)/2"), (b, "(w-tau)/2")):
            if abs(v - round(v.real)) < POLE_TOL and round(v.real) <= 0:
                raise PoleProximity(f"Gamma pole at {name} = {v}")
        val = math.sqrt(math.pi) * sf.gamma(a) * sf.gamma(b) / sf.gamma((complex(s) + complex(w)) / 2)
        return val.real if all(not isinstance(v, complex) for v in (s, w, tau)) else val
    p = int(place)
    return _zeta_p(p, _add(s, tau, -1)) * _zeta_p(p, _add(w, -tau)) / _zeta_p(p, _add(s, w))


def _add(*terms):
    if all(isinstance(t, (int, Fraction)) for t in terms):
        return sum(terms, Fraction(0))
    return sum(complex(t) for t in terms)


# =============================================================================
# Character integrals
# =============================================================================


def character_shell_integral(p: int, beta_valuation: int, measure: str = "multiplicative",
                             shell: int = 0) -> Fraction:
    """Integral of psi_p(beta x) over the shell |x| = p^shell.

    ``multiplicative``: average over O^x (total mass 1), shell must be 0:
        1 if v(beta) >= 0, -1/(p-1) if v(beta) = -1, 0 if v(beta) <= -2.
    ``additive``: additive Haar measure with vol(Z_p) = 1 on p^{-shell} O^x,
        which is p^shell (1 - 1/p) times the unit-shell average at
        v(beta) - shell."""
    if measure == "multiplicative":
        if shell != 0:
            raise ValueError("the multiplicative measure lives on O^x")
        v = beta_valuation
        if v >= 0:
            return Fraction(1)
        if v == -1:
            return Fraction(-1, p - 1)
        return Fraction(0)
    if measure == "additive":
        unit = character_shell_integral(p, beta_valuation - shell, "multiplicative")
        return Fraction(p) ** shell * (1 - Fraction(1, p)) * unit
    raise ValueError("measure must be 'multiplicative' or 'additive'")


def _ball_integral(p: int, kk: int, alpha_val: Optional[int]) -> Fraction:
    # integral of psi(alpha x) over |x| <= p^kk
    if alpha_val is None or alpha_val - kk >= 0:
        return Fraction(p) ** kk
    return Fraction(0)


# =============================================================================
# The exact shell oracle
# =============================================================================


def _geom(ratio, first):
    """first / (1 - ratio), after checking |ratio| < 1."""
    if abs(ratio) >= 1 - 1e-15:
        raise TruncationNotProvablyComplete(f"tail ratio {abs(ratio)} is not < 1")
    return first / (1 - ratio)


def _x_integral(p, kk, u, alpha_val):
    """X(kk) = int_{Q_p} max(p^kk, |x|)^{-u} psi(alpha x) dx."""
    inner = _pw(p, -kk * u) if isinstance(u, (int, Fraction)) else cmath.exp(-kk * u * math.log(p))
    tot = inner * _ball_integral(p, kk, alpha_val)
    if alpha_val is None:
        # shells j > kk, each p^{-ju} p^j (1 - 1/p): geometric
        first = _pw(p, _add((kk + 1), -(kk + 1) * _to_num(u))) * (1 - Fraction(1, p))
        ratio = _pw(p, _add(1, -_to_num(u)))
        return tot + _geom(ratio, first)
    # the character kills shells j >= alpha_val + 2
    for j in range(kk + 1, alpha_val + 2):
        tot += _pw(p, -j * _to_num(u)) * character_shell_integral(p, alpha_val, "additive", j)
    return tot


def _to_num(v):
    return v if isinstance(v, (int, Fraction)) else complex(v)


def _w_series(p, chi, k, m0, rho):
    """sum_{m >= m0} rho^m W_{k+m}, with W_n = p^{-n/2} sum_{i=0}^n chi^{n-2i}
    written through the two geometric progressions of the closed form."""
    rq = rho * p ** -0.5
    base = p ** (-k / 2)
    if abs(chi - 1 / chi) < 1e-3:
        # near chi = +-1 the closed form cancels; sum the terms directly
        tot = 0
        m = m0
        while True:
            n = k + m
            term = rho**m * whittaker_from_chi(p, chi, n)
            tot += term
            if m > m0 + 20 and abs(term) < 1e-18 * max(1.0, abs(tot)):
                return tot
            m += 1
            if m > m0 + 4000:
                raise TruncationNotProvablyComplete("Whittaker tail does not decay")
    # W_n = p^{-n/2} (chi^{n+1} - chi^{-n-1})/(chi - chi^{-1})
    den = chi - 1 / chi
    out = 0
    for z, c in ((chi, chi), (1 / chi, -1 / chi)):
        ratio = rq * z
        first = rho**m0 * base * p ** (-m0 / 2) * c * z ** (k + m0)
        out += _geom(ratio, first)
    return out / den


def whittaker_from_chi(p, chi, n):
    if n < 0:
        return 0.0
    return p ** (-n / 2) * sum(chi ** (n - 2 * i) for i in range(n + 1))


def oracle_nonarch(p: int, s, w, alpha_val: Optional[int] = None,
                   satake: Optional[SatakeParam] = None, twist_t: Optional[float] = None,
                   tau=0):
    """Exact shell evaluation of

        int_{G(Q_p)} W(diag(alpha, 1) g) psi(alpha x) H(g)^{-1} |t(g)|^tau dg

    with W the unramified Whittaker function of ``satake`` (or of chi = p^{-it}
    when ``twist_t`` is given) and v(alpha) = ``alpha_val``.  Without a
    Whittaker datum the plain (twisted) height integral is computed.

    The shell (m, j) contributes p^{m(1-s-tau)} max(p^kk, p^j)^{-(s+w)} times
    W(alpha varpi^m) and a character integral, kk = max(-m, 0)."""
    u = _add(s, w)
    e_m = _add(1, -_to_num(s), -_to_num(tau))  # exponent of p^m
    if satake is None and twist_t is not None:
        satake = SatakeParam(cmath.exp(-1j * twist_t * math.log(p)), p)
    if satake is None:
        if alpha_val is not None:
            raise ValueError("alpha only enters together with a Whittaker datum")
        # m >= 0: kk = 0.  m = -n < 0: X(n) = p^{n(1-u)} X(0) by scaling x.
        X0 = _x_integral(p, 0, u, None)
        pos = _geom(_pw(p, e_m), X0)
        ratio = _pw(p, _add(-_to_num(e_m), 1, -_to_num(u)))
        neg = _geom(ratio, ratio * X0)
        return pos + neg
    if satake.q != p:
        raise ValueError("Satake parameter belongs to another prime")
    if alpha_val is None:
        raise TruncationNotProvablyComplete("the Whittaker integral needs alpha")
    k = alpha_val
    if k < 0:
        # Whittaker support forces m >= -k > 0; there kk = 0 and both the ball
        # integral and every shell integral of psi(alpha x) vanish
        return 0.0
    rho = complex(_pw(p, e_m))
    tot = complex(_x_integral(p, 0, u, k)) * _w_series(p, satake.chi, k, 0, rho)
    for m in range(-k, 0):
        tot += rho**m * whittaker_unramified(satake, k + m) * complex(_x_integral(p, -m, u, k))
    return tot


def shell_truncation(alpha_val: Optional[int]) -> ShellTruncation:
    """Shells carrying the character integral (m unbounded above is summed
    as a geometric tail)."""
    if alpha_val is None:
        return ShellTruncation((-math.inf, math.inf), (-math.inf, math.inf))
    return ShellTruncation((-alpha_val, math.inf), (-math.inf, alpha_val + 1))


# =============================================================================
# Whittaker-twisted integrals, closed forms
# =============================================================================


def j_cuspidal(sp: SatakeParam, k: int, s, w) -> complex:
    """Closed formula for the integral of W(diag(alpha,1) g) H(g)^{-1} over
    G(Q_q), v(alpha) = k >= 0."""
    q = sp.q
    s = complex(s)
    w = complex(w)
    W = lambda j: whittaker_unramified(sp, k + j)
    L = hecke_l(sp, s - 0.5)
    a1 = q ** (-(s - 1))
    a2 = q ** (-2 * (s - 0.5))
    tot = W(0) + L * (a1 * W(1) - a2 * W(0))
    for m in range(1, k + 1):
        qw = q ** (-m * w)
        tot += qw * W(-m)
        tot += (1 - 1 / q) * L * (a1 * qw * W(-m + 1) - a2 * qw * W(-m))
    tot -= L * q ** (-s - (k + 1) * w)
    return tot


def j_eisenstein(t: float, p: int, k: int, s, w) -> complex:
    """The same integral for the Eisenstein Whittaker function, chi = p^{-it}."""
    sp = SatakeParam(cmath.exp(-1j * t * math.log(p)), p)
    return j_cuspidal(sp, k, s, w)


# =============================================================================
# Archimedean place
# =============================================================================


def whittaker_arch(mu, a: float) -> complex:
    """|a|^{1/2} K_mu(2 pi |a|) / K_mu(2 pi)."""
    if a == 0:
        raise ValueError("a must be nonzero")
    x = abs(a)
    return math.sqrt(x) * sf.bessel_k(mu, 2 * math.pi * x) / sf.bessel_k(mu, 2 * math.pi)


def j_arch_quadrature(mu, alpha: int, s, w, eps: float = 1e-8) -> float:
    """int_{R^x} int_R W(alpha t) |t|^{s-1} (1+t^2+x^2)^{-(s+w)/2} cos(2 pi alpha x) dx dt^x.

    The x-integral is an oscillatory Fourier integral (QUADPACK QAWF); the
    t-integral is adaptive over (0, inf) and doubled for t < 0."""
    from scipy import integrate

    s = float(s)
    w = float(w)
    u = s + w
    if not s > 1:
        raise ValueError("need s > 1")
    k_norm = sf.bessel_k(mu, 2 * math.pi).real
    if 2 * math.pi * alpha * 40 > 200:
        tmax = 200 / (2 * math.pi * alpha)
    else:
        tmax = 40.0

    def x_part(t):
        A = 1 + t * t
        val, err = integrate.quad(lambda x: (A + x * x) ** (-u / 2), 0, math.inf,
                                  weight="cos", wvar=2 * math.pi * alpha, limlst=200)
        return 2 * val

    def t_part(t):
        z = 2 * math.pi * alpha * t
        if z > 200 or z == 0:
            return 0.0
        # below the validated Bessel range the integrand is O(t^{s-3/2-|Re mu|})
        wv = math.sqrt(alpha * t) * sf.bessel_k(mu, z, check_range=False).real / k_norm
        return wv * t ** (s - 2) * x_part(t)

    val, err = integrate.quad(t_part, 0, tmax, epsabs=eps / 4, epsrel=0, limit=400)
    if not err < eps:
        raise QuadratureBudgetExceeded(f"error estimate {err} above {eps}")
    return 2 * val


# =============================================================================
# Global Z_res
# =============================================================================


def z_res(s, w) -> complex:
    """Lambda(s-1) Lambda(w) / Lambda(s+w)."""
    s = complex(s)
    w = complex(w)
    for v, name in ((s - 1, "s-1"), (w, "w")):
        if abs(v) < POLE_TOL or abs(v - 1) < POLE_TOL:
            raise PoleProximity(f"Lambda pole at {name} = {v}")
    return sf.lambda_value(s - 1) * sf.lambda_value(w) / sf.lambda_value(s + w)


def euler_product_check(s, w, P: int) -> complex:
    """Archimedean integral times the local factors over p < P."""
    s = complex(s)
    w = complex(w)
    ps = primes_below(P).astype(np.float64)
    a = np.exp(-(s + w) * np.log(ps))
    b = np.exp(-(s - 1) * np.log(ps))
    c = np.exp(-w * np.log(ps))
    logs = np.log1p(-a) - np.log1p(-b) - np.log1p(-c)
    prod = np.exp(math.fsum(logs.real) + 1j * math.fsum(logs.imag))
    return height_integral_arch(s, w) * prod
