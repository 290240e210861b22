"""Power sums sum_{r=a}^{b} r**alpha over integer rank ranges, in log space.

Rank ranges reach |X|**n, so endpoints are arbitrary-precision integers
and results are carried as natural logs.  Short ranges are summed term
by term; small nonnegative integer orders use exact Faulhaber closed
forms; everything else uses the Euler-Maclaurin expansion through the
first Bernoulli correction.  Because f(x) = x**alpha has sign-constant
second derivative on positive ranges, the remainder after that term is
bounded by |f'(b) - f'(a)|/12, so each segment carries a certificate;
segments that fail the relative-error check are bisected.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["DIRECT_LIMIT", "power_sum_log", "power_sum"]

DIRECT_LIMIT = 10**6


def _faulhaber(b: int, k: int) -> int:
    """sum_{r=1}^{b} r**k exactly for k in {0, 1, 2, 3}."""
    if k == 0:
        return b
    if k == 1:
        return b * (b + 1) // 2
    if k == 2:
        return b * (b + 1) * (2 * b + 1) // 6
    return (b * (b + 1) // 2) ** 2


def _log1mexp(u: float) -> float:
    """log(1 - exp(u)) for u < 0, stable at both ends."""
    if u > -0.6931471805599453:
        return math.log(-math.expm1(u))
    return math.log1p(-math.exp(u))


def _log_integral(log_lo: float, log_hi: float, alpha: float) -> float:
    """log of integral_lo^hi x**alpha dx."""
    c = alpha + 1.0
    if c == 0.0:
        return math.log(log_hi - log_lo)
    if c > 0.0:
        return c * log_hi + _log1mexp(c * (log_lo - log_hi)) - math.log(c)
    return c * log_lo + _log1mexp(c * (log_hi - log_lo)) - math.log(-c)


def _direct_log(lo: int, hi: int, alpha: float) -> float:
    count = int(hi - lo + 1)
    log_lo = math.log(lo)
    lt0 = alpha * log_lo
    if count == 1:
        return lt0
    offs = np.arange(1, count, dtype=np.float64)
    ratios = np.exp(np.log(offs) - log_lo)
    logr = log_lo + np.log1p(ratios)
    lt = alpha * logr
    top = max(float(np.max(lt)), lt0)
    return top + math.log(float(np.sum(np.exp(lt - top))) + math.exp(lt0 - top))


def _euler_maclaurin_log(lo: int, hi: int, alpha: float, rtol: float) -> float | None:
    """Certified segment estimate, or None when the certificate fails."""
    log_lo = math.log(lo)
    log_hi = math.log(hi)
    log_i = _log_integral(log_lo, log_hi, alpha)
    if not math.isfinite(log_i):
        return None
    try:
        r_fa = math.exp(alpha * log_lo - log_i)
        r_fb = math.exp(alpha * log_hi - log_i)
        d_lo = math.exp((alpha - 1.0) * log_lo - log_i)
        d_hi = math.exp((alpha - 1.0) * log_hi - log_i)
    except OverflowError:
        return None
    correction = (alpha / 12.0) * (d_hi - d_lo)
    remainder = (abs(alpha) / 12.0) * (d_hi + d_lo)
    delta = 0.5 * (r_fa + r_fb) + correction
    if not abs(delta) < 0.5:
        return None
    if remainder > rtol * (1.0 + delta):
        return None
    return log_i + math.log1p(delta)


def _narrow_log(lo: int, hi: int, alpha: float) -> float:
    # count/lo is below 1e-13/|alpha|: the summand is constant to within rtol
    mid = (lo + hi) // 2
    return math.log(hi - lo + 1) + alpha * math.log(mid)


def power_sum_log(a: int, b: int, alpha: float, rtol: float = 1e-12) -> float:
    """log of sum_{r=a}^{b} r**alpha; -inf for an empty range."""
    if b < a:
        return -math.inf
    if a < 1:
        raise ValueError(f"rank ranges start at 1, got {a}")
    alpha = float(alpha)
    if alpha in (0.0, 1.0, 2.0, 3.0):
        return math.log(_faulhaber(b, int(alpha)) - _faulhaber(a - 1, int(alpha)))
    scale = int(abs(alpha)) + 1
    segments: list[float] = []
    stack: list[tuple[int, int]] = [(a, b)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo + 1 <= DIRECT_LIMIT:
            segments.append(_direct_log(lo, hi, alpha))
            continue
        if (hi - lo + 1) * scale * 10**13 <= lo:
            segments.append(_narrow_log(lo, hi, alpha))
            continue
        est = _euler_maclaurin_log(lo, hi, alpha, rtol)
        if est is not None:
            segments.append(est)
        else:
            mid = (lo + hi) // 2
            stack.append((lo, mid))
            stack.append((mid + 1, hi))
    top = max(segments)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(s - top) for s in segments))


def power_sum(a: int, b: int, alpha: float, rtol: float = 1e-12) -> float:
    """sum_{r=a}^{b} r**alpha as a float; overflows saturate to inf."""
    if b >= a and float(alpha) in (0.0, 1.0, 2.0, 3.0):
        exact = _faulhaber(b, int(alpha)) - _faulhaber(a - 1, int(alpha))
        try:
            return float(exact)
        except OverflowError:
            return math.inf
    log_s = power_sum_log(a, b, alpha, rtol)
    if log_s == -math.inf:
        return 0.0
    try:
        return math.exp(log_s)
    except OverflowError:
        return math.inf
