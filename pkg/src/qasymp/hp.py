"""Extended-precision fallbacks built on mpmath.

The binary64 kernels cover almost every evaluation.  These routines handle
the few places where cancellation or a vanishingly small error rate makes
double precision useless: alternating theta sums near the unit circle,
and relative errors of size 1e-40 in the q -> 1 regimes.
"""

from __future__ import annotations

import math

import mpmath

from .core import LogComplex


def to_logcomplex(x) -> LogComplex:
    x = mpmath.mpc(x)
    if x == 0:
        return LogComplex.zero()
    return LogComplex(float(mpmath.log(abs(x))), float(mpmath.arg(x)))


def dps_for(rate: float, extra: int = 25) -> int:
    """Decimal digits needed to resolve relative effects of size ``rate``."""
    if rate <= 0 or not math.isfinite(rate):
        return 30 + extra
    return max(30, int(-math.log10(rate)) + extra)


def theta_terms_sum(idx: int, log_nome: complex, log_z: complex, kmin: int, kmax: int, dps: int, exact=None):
    """``sum_{k=kmin}^{kmax}`` of the theta-series terms, evaluated with ``dps`` digits.

    ``exact=(v, tau)`` rebuilds ``log_z = 2 pi i v`` and ``log_nome = pi i tau``
    at working precision; near a zero the float logs have already lost the value.
    A callable ``exact`` is called inside the precision context and returns the pair.
    """
    c = 0.5 if idx in (1, 2) else 0.0
    with mpmath.workdps(dps):
        if exact is None:
            ln_p = mpmath.mpc(log_nome)
            lz = mpmath.mpc(log_z)
        else:
            v, tau = exact() if callable(exact) else exact
            ln_p = 1j * mpmath.pi * mpmath.mpc(tau)
            lz = 2j * mpmath.pi * mpmath.mpc(v)
        s = mpmath.mpc(0)
        for k in range(kmin, kmax + 1):
            x = k + mpmath.mpf(c)
            t = mpmath.exp(x * x * ln_p + x * lz)
            if idx in (1, 4) and k % 2:
                t = -t
            s += t
        if idx == 1:
            s *= -1j
        return to_logcomplex(s)


def qpoch_inf(a, q, dps: int):
    """``(a;q)_inf`` for ``|q| < 1`` by direct product, to working precision ``dps``."""
    with mpmath.workdps(dps):
        a = mpmath.mpc(a)
        q = mpmath.mpc(q)
        eps = mpmath.mpf(10) ** (-dps - 5)
        prod = mpmath.mpc(1)
        term = a
        while abs(term) > eps * (1 - abs(q)):
            prod *= 1 - term
            term *= q
        return prod


def rel_err(actual, predicted) -> float:
    """``|actual/predicted - 1|`` for mpmath numbers, returned as a float."""
    return float(abs(actual / predicted - 1))


def series_sum(log_terms_fn, kmax: int, dps: int):
    """``sum_{k=0}^{kmax} exp(log_terms_fn(k))`` with mpmath ``log_terms_fn``."""
    with mpmath.workdps(dps):
        s = mpmath.mpc(0)
        for k in range(kmax + 1):
            s += mpmath.exp(log_terms_fn(k))
        return s
