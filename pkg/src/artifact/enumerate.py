"""Exhaustive enumeration of points of PGL2(Q) of bounded height.

Each sign class is represented once by requiring (c, d) to have its first
nonzero entry positive; (c, d) != (0, 0) because det != 0.  The outer loops
run over (c, d) so that g and r' are computed once per pair, and the inner
loops over (a, b) are cut by Sigma^{x+y} r'^{x-y} < B^2.

The kernel compares logarithms in double precision.  Points whose log
height lies within a small window of a threshold are not counted there but
handed back and decided by exact integer comparison, so counts are exact.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numba as nb
import numpy as np

from .arith import BundleParams, HeightToken, PrimitivePoint, as_fraction, canonicalize
from .errors import RadiusOverflow, TieBufferOverflow

__all__ = [
    "CountQuery",
    "CountRecord",
    "search_radius",
    "count_points",
    "count_grid",
    "count_bounds",
    "iter_points",
    "stream_points",
    "default_threads",
    "DEFAULT_MAX_RADIUS",
]

DEFAULT_MAX_RADIUS = 200_000
TIE_WINDOW = 1e-9
TIE_CAPACITY = 1 << 18
THREADS_ENV = "ARTIFACT_THREADS"


@dataclass(frozen=True)
class CountQuery:
    bundle: BundleParams
    bound: Fraction
    thread_hint: Optional[int] = None

    def __init__(self, bundle, bound, thread_hint=None):
        object.__setattr__(self, "bundle", bundle)
        object.__setattr__(self, "bound", as_fraction(bound))
        object.__setattr__(self, "thread_hint", thread_hint)


@dataclass(frozen=True)
class CountRecord:
    bound: Fraction
    count: int
    main_term: float
    residual: float
    elapsed: float  # seconds


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


# =============================================================================
# Radius
# =============================================================================


def _iroot_floor(num: int, den: int, k: int) -> int:
    """floor((num/den)^{1/k}) for positive integers."""
    n = int((num / den) ** (1.0 / k))
    while n > 0 and n**k * den > num:
        n -= 1
    while (n + 1) ** k * den <= num:
        n += 1
    return n


def search_radius(bundle: BundleParams, B) -> int:
    """Sigma_max with Sigma <= Sigma_max for every point of height < B.

    Uses H >= Sigma^{(x+y)/2} when x >= y and H >= Sigma^{x} otherwise
    (from 1 <= r' <= Sigma)."""
    B = as_fraction(B)
    if B <= 0:
        return 0
    e = 2 / (bundle.x + bundle.y) if bundle.x >= bundle.y else 1 / bundle.x
    # floor(B^{p/q}) = floor((B^p)^{1/q})
    p, q = e.numerator, e.denominator
    return _iroot_floor(B.numerator**p, B.denominator**p, q)


# =============================================================================
# Kernel
# =============================================================================


@nb.njit(cache=True, nogil=True)
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@nb.njit(cache=True, nogil=True)
def _isqrt(n):
    if n < 0:
        return -1
    r = int(math.sqrt(n))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@nb.njit(cache=True, nogil=True)
def _kernel(cs, smax, p1, p2, logthr, window, tie_s, tie_r, tie_n):
    nthr = logthr.shape[0]
    cnt = np.zeros(nthr + 1, np.int64)
    top = logthr[nthr - 1]
    cap = tie_s.shape[0]
    for ci in range(cs.shape[0]):
        c = cs[ci]
        dmax = _isqrt(smax - c * c)
        for d in range(-dmax, dmax + 1):
            if c == 0 and d <= 0:
                continue
            r = c * c + d * d
            g = _gcd(c, d)
            rp = r // (g * g)
            lrp = math.log(rp)
            T = math.exp((top + window - p2 * lrp) / p1)
            if T > smax:
                smx = smax
            else:
                smx = int(T)
            R = smx - r
            if R < 0:
                continue
            amax = _isqrt(R)
            for a in range(-amax, amax + 1):
                bmax = _isqrt(R - a * a)
                ga = _gcd(a, g)
                for b in range(-bmax, bmax + 1):
                    if a * d - b * c == 0:
                        continue
                    if ga != 1 and _gcd(ga, b) != 1:
                        continue
                    S = a * a + b * b + r
                    lh = p1 * math.log(S) + p2 * lrp
                    j = 0
                    while j < nthr and lh >= logthr[j]:
                        j += 1
                    near = False
                    if j < nthr and logthr[j] - lh < window:
                        near = True
                    if j > 0 and lh - logthr[j - 1] < window:
                        near = True
                    if near:
                        k = tie_n[0]
                        if k < cap:
                            tie_s[k] = S
                            tie_r[k] = rp
                        tie_n[0] = k + 1
                        continue
                    cnt[j] += 1
    return cnt


def _run_pass(bundle: BundleParams, bounds: list, threads: int, max_radius: int):
    """Counts N(B) for every B in ``bounds`` (sorted ascending) in one pass."""
    smax = search_radius(bundle, bounds[-1])
    if smax > max_radius:
        raise RadiusOverflow(f"search radius {smax} exceeds budget {max_radius}")
    out = np.zeros(len(bounds), dtype=np.int64)
    if smax < 2:
        return [0] * len(bounds)
    p1, p2 = bundle.exponents
    logthr = np.array([2 * (math.log(B.numerator) - math.log(B.denominator)) for B in bounds])
    cmax = math.isqrt(smax)
    threads = max(1, min(threads, cmax + 1))
    chunks = [np.arange(k, cmax + 1, threads, dtype=np.int64) for k in range(threads)]

    def work(cs):
        ts = np.zeros(TIE_CAPACITY, np.int64)
        tr = np.zeros(TIE_CAPACITY, np.int64)
        tn = np.zeros(1, np.int64)
        cnt = _kernel(cs, smax, float(p1), float(p2), logthr, TIE_WINDOW, ts, tr, tn)
        n = int(tn[0])
        if n > TIE_CAPACITY:
            raise TieBufferOverflow(f"{n} near-tie points exceed buffer")
        return cnt, ts[:n].copy(), tr[:n].copy()

    if threads == 1:
        results = [work(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, chunks))

    cnt = np.zeros(len(bounds) + 1, np.int64)
    for c, ts, tr in results:
        cnt += c
        for S, rp in zip(ts.tolist(), tr.tolist()):
            tok = HeightToken(S, rp, bundle.x, bundle.y)
            for j, B in enumerate(bounds):
                if tok.lt(B):
                    cnt[j] += 1
                    break
            else:
                cnt[len(bounds)] += 1
    out = np.cumsum(cnt)[:-1]
    return [int(v) for v in out]


def count_bounds(bundle: BundleParams, bounds, threads: Optional[int] = None,
                 max_radius: int = DEFAULT_MAX_RADIUS) -> list:
    """Exact counts for arbitrary bounds, returned in the given order."""
    bs = [as_fraction(B) for B in bounds]
    order = sorted(range(len(bs)), key=lambda i: bs[i])
    positive = [i for i in order if bs[i] > 0]
    res = [0] * len(bs)
    if positive:
        counts = _run_pass(bundle, [bs[i] for i in positive], threads or default_threads(), max_radius)
        for i, c in zip(positive, counts):
            res[i] = c
    return res


def _record(bundle, B, count, elapsed, secondary) -> CountRecord:
    from .peyre import predicted_count

    main = predicted_count(bundle, B, secondary=secondary) if B > 1 else float("nan")
    return CountRecord(B, count, main, (count - main) / float(B), elapsed)


def count_points(q: CountQuery, max_radius: int = DEFAULT_MAX_RADIUS,
                 secondary: str = "closed-form") -> CountRecord:
    if q.bound <= 0:
        raise ValueError("bound must be positive")
    t0 = time.perf_counter()
    (n,) = count_bounds(q.bundle, [q.bound], q.thread_hint, max_radius)
    return _record(q.bundle, q.bound, n, time.perf_counter() - t0, secondary)


def count_grid(bundle: BundleParams, B0, ratio, k: int, threads: Optional[int] = None,
               max_radius: int = DEFAULT_MAX_RADIUS, secondary: str = "closed-form") -> list:
    """Counts at B0 * ratio^j, j < k, from a single enumeration pass.  Every
    record carries the elapsed time of that shared pass."""
    B0 = as_fraction(B0)
    ratio = as_fraction(ratio)
    if not ratio > 1 or k < 1 or B0 <= 0:
        raise ValueError("need ratio > 1, k >= 1, B0 > 0")
    bounds = [B0 * ratio**j for j in range(k)]
    t0 = time.perf_counter()
    counts = count_bounds(bundle, bounds, threads, max_radius)
    el = time.perf_counter() - t0
    return [_record(bundle, B, n, el, secondary) for B, n in zip(bounds, counts)]


# =============================================================================
# Point streams
# =============================================================================


def iter_points(bundle: BundleParams, B) -> Iterator[PrimitivePoint]:
    """All points of height < B in canonical form (pure Python; small B)."""
    B = as_fraction(B)
    smax = search_radius(bundle, B)
    cmax = math.isqrt(smax)
    for c in range(0, cmax + 1):
        dmax = math.isqrt(smax - c * c)
        for d in range(-dmax, dmax + 1):
            if c == 0 and d <= 0:
                continue
            r = c * c + d * d
            g = math.gcd(c, d)
            rp = r // (g * g)
            amax = math.isqrt(smax - r)
            for a in range(-amax, amax + 1):
                bmax = math.isqrt(smax - r - a * a)
                for b in range(-bmax, bmax + 1):
                    if a * d - b * c == 0 or math.gcd(math.gcd(a, b), g) != 1:
                        continue
                    if HeightToken(a * a + b * b + r, rp, bundle.x, bundle.y).lt(B):
                        yield canonicalize((a, b, c, d))


def stream_points(bundle: BundleParams, B, path) -> int:
    """Write 'a b c d' lines, sorted lexicographically; returns the count."""
    pts = sorted(iter_points(bundle, B))
    with open(path, "w", encoding="utf-8") as fh:
        for p in pts:
            fh.write(f"{p.a} {p.b} {p.c} {p.d}\n")
    return len(pts)
