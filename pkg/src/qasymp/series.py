"""Certified summation of power series given by their log-terms."""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from . import hp
from .core import DEFAULT_POLICY, EPS, NEG_INF, LogComplex, TruncationPolicy, sum_log_terms
from .errors import NonConvergent

LogTermFn = Callable[[np.ndarray], np.ndarray]
RatioBoundFn = Callable[[int], float]
# (number of terms, decimal digits) -> mpmath sum of those terms
MpSumFn = Callable[[int, int], object]

# relative error above which a series is re-summed in extended precision
MP_TRIGGER = 1e-13


class SeriesSum(NamedTuple):
    value: LogComplex
    log_err: float  # log of an absolute error bound (tail + rounding estimate)
    log_abs_sum: float  # log of sum |t_k|
    n_terms: int

    @property
    def rel_err(self) -> float:
        if self.value.is_zero:
            return math.inf if self.log_err > NEG_INF else 0.0
        d = self.log_err - self.value.log_mag
        return math.exp(min(d, 700.0))


def log_rounding(lt: np.ndarray) -> float:
    """Log of ``4 eps sum |t_k| (1 + |log t_k|)``, a rounding estimate for the sum."""
    re = lt.real
    finite = re > NEG_INF
    if not finite.any():
        return NEG_INF
    top = float(re[finite].max())
    w = np.exp(re[finite] - top) * (1.0 + np.abs(lt[finite]))
    return top + math.log(4.0 * EPS * math.fsum(w))


def sum_series(
    log_term: LogTermFn,
    log_ratio_bound: RatioBoundFn,
    pol: TruncationPolicy = DEFAULT_POLICY,
    min_terms: int = 16,
    mp_sum: MpSumFn | None = None,
) -> SeriesSum:
    """Sum ``sum_{k>=0} exp(log_term(k))``.

    ``log_ratio_bound(k)`` must bound ``log|t_{j+1}/t_j|`` for every ``j >= k``;
    once it is negative the tail after index ``k`` is dominated by a geometric
    series.  Terms are added until that tail drops below ``rel_tol`` times the
    largest term seen.  When cancellation leaves the binary64 sum with a
    relative error above ``MP_TRIGGER`` and ``mp_sum`` is supplied, the same
    terms are re-summed with enough extra digits.
    """
    n = max(min_terms, 2)
    while True:
        if n > pol.max_terms:
            raise NonConvergent(f"series needs more than max_terms={pol.max_terms} terms")
        k = np.arange(n)
        lt = log_term(k)
        re = lt.real
        top = float(re[re > NEG_INF].max()) if (re > NEG_INF).any() else NEG_INF
        last = n - 1
        lr = log_ratio_bound(last)
        if lr < 0:
            r = math.exp(lr)
            log_tail = float(re[last]) + lr - math.log1p(-r)
            if top == NEG_INF or log_tail < top + math.log(pol.rel_tol) - 2.0:
                total, log_abs = sum_log_terms(lt)
                # under cancellation the sum sits far below the largest term,
                # so the tail must also be small relative to the sum itself
                if not total.is_zero and log_tail > total.log_mag + math.log(pol.rel_tol) - 2.0:
                    if n < pol.max_terms:
                        n = min(2 * n, pol.max_terms)
                        continue
                log_err = float(np.logaddexp(log_tail, log_rounding(lt)))
                out = SeriesSum(total, log_err, log_abs, n)
                if mp_sum is not None and out.rel_err > MP_TRIGGER:
                    out = _resum(out, log_tail, mp_sum)
                return out
        n = min(2 * n, pol.max_terms + 1) if n < pol.max_terms else n + 1


def _resum(approx: SeriesSum, log_tail: float, mp_sum: MpSumFn) -> SeriesSum:
    lost = max(0.0, (approx.log_abs_sum - approx.value.log_mag) / math.log(10))
    if approx.value.is_zero:
        lost = 40.0
    dps = int(lost) + 30
    for _ in range(5):
        val = hp.to_logcomplex(mp_sum(approx.n_terms, dps))
        if val.is_zero:  # exact cancellation of exactly represented terms
            log_round = approx.log_abs_sum + (-(dps - 3)) * math.log(10)
            return SeriesSum(val, float(np.logaddexp(log_tail, log_round)), approx.log_abs_sum, approx.n_terms)
        else:
            log_round = approx.log_abs_sum + (-(dps - 3)) * math.log(10)
            log_err = float(np.logaddexp(log_tail, log_round))
            if log_err - val.log_mag < math.log(MP_TRIGGER):
                return SeriesSum(val, log_err, approx.log_abs_sum, approx.n_terms)
        dps *= 2
    return approx
