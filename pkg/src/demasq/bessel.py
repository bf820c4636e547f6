"""Bessel functions J0 and J1 and the positive zeros of J0.

Everything here is computed natively in IEEE double precision (the power
series is accumulated in double-double to survive the alternating-series
cancellation), so the package carries no special-function dependency.
The zeros drive the drumhead mode frequencies used by the energy module.
"""

from __future__ import annotations

import math
import sys
import threading
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Switch between the power series and the Hankel asymptotic expansion.
# Below the cutoff the series (in double-double) is exact to ~1 ulp; above
# it the asymptotic truncation error is comfortably under 1e-15.
_SERIES_CUTOFF = 15.5

_MAX_ZERO_ORDER = 10000

_EPS = sys.float_info.epsilon

_SQRT_HALF = math.sqrt(0.5)
_TWO_OVER_PI = 2.0 / math.pi

# ---------------------------------------------------------------------------
# Double-double helpers (error-free transformations).
# A value is a pair (hi, lo) with hi + lo exact and |lo| <= ulp(hi)/2.

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    c = _SPLITTER * a
    ahi = c - (c - a)
    alo = a - ahi
    c = _SPLITTER * b
    bhi = c - (c - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def _dd_add(ahi: float, alo: float, bhi: float, blo: float) -> tuple[float, float]:
    s, e = _two_sum(ahi, bhi)
    return _two_sum(s, e + alo + blo)


def _dd_mul(ahi: float, alo: float, bhi: float, blo: float) -> tuple[float, float]:
    p, e = _two_prod(ahi, bhi)
    return _two_sum(p, e + ahi * blo + alo * bhi)


def _dd_div_scalar(ahi: float, alo: float, d: float) -> tuple[float, float]:
    q1 = ahi / d
    p, e = _two_prod(q1, d)
    q2 = (((ahi - p) - e) + alo) / d
    return _two_sum(q1, q2)


# ---------------------------------------------------------------------------
# Power series, |x| <= _SERIES_CUTOFF.
#
#   J0(x) = sum_k (-1)^k (x^2/4)^k / (k!)^2
#   J1(x) = (x/2) sum_k (-1)^k (x^2/4)^k / (k! (k+1)!)
#
# At the cutoff the largest term is ~7e4 while the result is O(0.1), so the
# naive double sum loses ~12 digits; double-double keeps the full 53 bits.


def _j0_series(x: float) -> float:
    qhi, qlo = _two_prod(x, x)
    qhi *= 0.25
    qlo *= 0.25
    thi, tlo = 1.0, 0.0
    shi, slo = 1.0, 0.0
    for k in range(1, 200):
        thi, tlo = _dd_mul(thi, tlo, qhi, qlo)
        thi, tlo = _dd_div_scalar(thi, tlo, float(k * k))
        thi, tlo = -thi, -tlo
        shi, slo = _dd_add(shi, slo, thi, tlo)
        if abs(thi) < 1e-25 * (abs(shi) + 1.0):
            break
    return shi + slo


def _j1_series(x: float) -> float:
    qhi, qlo = _two_prod(x, x)
    qhi *= 0.25
    qlo *= 0.25
    thi, tlo = 0.5 * x, 0.0
    shi, slo = thi, tlo
    for k in range(1, 200):
        thi, tlo = _dd_mul(thi, tlo, qhi, qlo)
        thi, tlo = _dd_div_scalar(thi, tlo, float(k * (k + 1)))
        thi, tlo = -thi, -tlo
        shi, slo = _dd_add(shi, slo, thi, tlo)
        if abs(thi) < 1e-25 * (abs(shi) + 1.0):
            break
    return shi + slo


# ---------------------------------------------------------------------------
# Hankel asymptotic expansion, |x| > _SERIES_CUTOFF.
#
#   J_nu(x) ~ sqrt(2/(pi x)) [cos(w) P(x) - sin(w) Q(x)],  w = x - nu*pi/2 - pi/4
#
# with P, Q the even/odd halves of the sequence v_m = a_m(nu)/x^m,
# v_m = v_{m-1} (4 nu^2 - (2m-1)^2) / (8 m x).  cos(w)/sin(w) are expanded
# through the angle-sum identities so libm does the argument reduction of
# the raw x, keeping the phase accurate for x up to several thousand.


def _hankel_sums(four_nu_sq: float, x: float) -> tuple[float, float]:
    p_sum = 1.0  # v_0 term
    q_sum = 0.0
    v = 1.0
    sign_p = -1.0  # (-1)^k for the next even term (k=1)
    sign_q = 1.0   # (-1)^k for the next odd term (k=0)
    prev = math.inf
    for m in range(1, 80):
        v *= (four_nu_sq - (2 * m - 1) ** 2) / (8.0 * m * x)
        av = abs(v)
        if av >= prev:  # asymptotic tail started diverging
            break
        prev = av
        if m % 2:  # odd m contributes to Q
            q_sum += sign_q * v
            sign_q = -sign_q
        else:      # even m contributes to P
            p_sum += sign_p * v
            sign_p = -sign_p
        if av < 1e-18:
            break
    return p_sum, q_sum


def _j0_asymptotic(x: float) -> float:
    p, q = _hankel_sums(0.0, x)
    c = math.cos(x)
    s = math.sin(x)
    # cos(x - pi/4) = (c + s)/sqrt2, sin(x - pi/4) = (s - c)/sqrt2
    return math.sqrt(_TWO_OVER_PI / x) * ((c + s) * p - (s - c) * q) * _SQRT_HALF


def _j1_asymptotic(x: float) -> float:
    p, q = _hankel_sums(4.0, x)
    c = math.cos(x)
    s = math.sin(x)
    # cos(x - 3pi/4) = (s - c)/sqrt2, sin(x - 3pi/4) = -(s + c)/sqrt2
    return math.sqrt(_TWO_OVER_PI / x) * ((s - c) * p + (s + c) * q) * _SQRT_HALF


# ---------------------------------------------------------------------------
# Public evaluation.


def eval_j0(x: float) -> float:
    """Bessel function of the first kind, order zero."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"eval_j0 requires a finite argument, got {x!r}")
    ax = abs(x)  # J0 is even
    if ax <= _SERIES_CUTOFF:
        return _j0_series(ax)
    return _j0_asymptotic(ax)


def eval_j1(x: float) -> float:
    """Bessel function of the first kind, order one."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"eval_j1 requires a finite argument, got {x!r}")
    ax = abs(x)
    val = _j1_series(ax) if ax <= _SERIES_CUTOFF else _j1_asymptotic(ax)
    return -val if x < 0.0 else val  # J1 is odd


def zero_of_j0(n: int) -> float:
    """n-th positive zero of J0 (n = 1 gives 2.404825...).

    McMahon's expansion seeds a Newton iteration (J0' = -J1); an interval
    bisection stands by in case Newton ever fails to settle.  Both stop at
    the evaluation noise floor, which grows with the argument, so the
    tolerance is the larger of 1e-13 and a few ulps of x.
    """
    n = _check_order(n, "zero_of_j0")
    beta = (n - 0.25) * math.pi
    x = beta + 1.0 / (8.0 * beta)
    prev = math.inf
    for _ in range(50):
        step = eval_j0(x) / eval_j1(x)  # Newton: x - J0/J0' with J0' = -J1
        x += step
        a = abs(step)
        # second clause: the step stopped shrinking, i.e. noise floor
        if a <= max(1e-13, 8.0 * _EPS * x) or a >= prev:
            return x
        prev = a
    return _bisect_zero(beta - 1.0, beta + 1.0)


def _bisect_zero(lo: float, hi: float) -> float:
    flo = eval_j0(lo)
    if flo * eval_j0(hi) > 0.0:
        raise DomainError(f"no sign change of J0 in [{lo}, {hi}]")
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:  # bracket is one ulp wide
            break
        if flo * eval_j0(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
            flo = eval_j0(lo)
    return 0.5 * (lo + hi)


def _check_order(n, where: str) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise DomainError(f"{where} requires an integer order, got {n!r}")
    if n < 1:
        raise DomainError(f"{where} requires n >= 1, got {n}")
    if n > _MAX_ZERO_ORDER:
        raise DomainError(f"{where} supports n <= {_MAX_ZERO_ORDER}, got {n}")
    return int(n)


# ---------------------------------------------------------------------------
# Zero table.


@dataclass(frozen=True)
class BesselZeroTable:
    """Cached positive zeros of J0; ``zeros[i]`` is the (i+1)-th zero."""

    max_order: int
    zeros: np.ndarray  # read-only, strictly increasing

    def zero(self, n: int) -> float:
        """The n-th positive zero (1-based)."""
        n = _check_order(n, "BesselZeroTable.zero")
        if n > self.max_order:
            raise DomainError(
                f"table holds orders 1..{self.max_order}, requested {n}")
        return float(self.zeros[n - 1])

    def ratio(self, n: int) -> float:
        """zero(n) / zero(1), the drumhead mode frequency ratio."""
        return self.zero(n) / float(self.zeros[0])


_zero_cache: list[float] = []
_zero_cache_lock = threading.Lock()


def build_table(max_order: int) -> BesselZeroTable:
    """Table of the first ``max_order`` positive zeros of J0.

    Zeros are computed lazily and cached process-wide; the cache only ever
    grows, so repeated calls are cheap and idempotent.
    """
    max_order = _check_order(max_order, "build_table")
    with _zero_cache_lock:
        for n in range(len(_zero_cache) + 1, max_order + 1):
            _zero_cache.append(zero_of_j0(n))
        zeros = np.array(_zero_cache[:max_order], dtype=np.float64)
    zeros.setflags(write=False)
    return BesselZeroTable(max_order=max_order, zeros=zeros)
