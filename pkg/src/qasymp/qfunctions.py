"""Euler's q-exponential, the Ramanujan function and Jackson's second q-Bessel function."""

from __future__ import annotations

import cmath
import math
from enum import Enum

import mpmath
import numpy as np

from .core import (
    DEFAULT_POLICY,
    EPS,
    NEG_INF,
    LogComplex,
    TruncationPolicy,
    as_qparam,
    log_qpoch_inf,
)
from .errors import BranchError, DomainError, InternalDisagreement
from .series import SeriesSum, sum_series


class QFunction(str, Enum):
    EQ = "EQ"
    AQ = "AQ"
    JNU = "JNU"


def log_qq_table(ln_q: float, n: int) -> np.ndarray:
    """``log (q;q)_k`` for ``k = 0..n-1`` (all real)."""
    out = np.zeros(n)
    if n > 1:
        out[1:] = np.cumsum(np.log(-np.expm1(np.arange(1, n) * ln_q)))
    return out


def log_shifted_table(ln_q: float, log_a: float, n: int) -> np.ndarray:
    """``log (a;q)_k`` for real ``0 < a < 1``, ``k = 0..n-1``."""
    out = np.zeros(n)
    if n > 1:
        out[1:] = np.cumsum(np.log(-np.expm1(log_a + np.arange(n - 1) * ln_q)))
    return out


# ---------------------------------------------------------------------------
# E_q


def eq_series_log(log_z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> SeriesSum:
    """``sum q^{k(k-1)/2} z^k/(q;q)_k`` with ``z = exp(log_z)``."""
    qp = as_qparam(q)
    ln_q, log_z = qp.ln_q, complex(log_z)
    abs_log = log_z.real

    def terms(k):
        return 0.5 * k * (k - 1) * ln_q + k * log_z - log_qq_table(ln_q, k.size)

    def ratio(k):
        return k * ln_q + abs_log - math.log(-math.expm1((k + 1) * ln_q))

    return sum_series(terms, ratio, pol)


def eq_euler_certified(z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY):
    """Product value of ``E_q(z) = (-z;q)_inf`` and its relative error bound.

    The series is evaluated as well; the two must agree within their
    certificates or ``InternalDisagreement`` is raised.
    """
    qp = as_qparam(q)
    z = complex(z)
    if z == 0:
        return LogComplex.one(), 0.0
    lp, perr = log_qpoch_inf(-z, qp.q, pol)
    prod = LogComplex.from_log(lp)
    ser = eq_series_log(cmath.log(z), qp, pol)
    if prod.is_zero:
        allowed_log = ser.log_err + math.log(4.0)
        if ser.value.log_mag > allowed_log + 1.0:
            raise InternalDisagreement("E_q product vanishes but series does not")
        return prod, 0.0
    _check_agreement(prod, perr, ser, "E_q")
    return prod, perr


def _check_agreement(prod: LogComplex, perr: float, ser: SeriesSum, name: str) -> None:
    top = max(prod.log_mag, ser.value.log_mag)
    diff = abs(prod.scaled(-top).to_complex() - ser.value.scaled(-top).to_complex())
    allowed = (
        (perr + 64 * EPS) * math.exp(prod.log_mag - top)
        + math.exp(ser.log_err - top)
        + 64 * EPS * math.exp(ser.log_abs_sum - top)
    )
    if diff > 4.0 * allowed:
        raise InternalDisagreement(
            f"{name} product and series differ by {diff:.3e} (scaled), allowed {allowed:.3e}"
        )


def eq_euler(z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> LogComplex:
    """Euler's q-exponential ``E_q(z) = (-z;q)_inf``."""
    return eq_euler_certified(z, q, pol)[0]


# ---------------------------------------------------------------------------
# A_q


def aq_series_log(log_z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> SeriesSum:
    """``A_q(z) = sum q^{k^2} (-z)^k/(q;q)_k`` with ``z = exp(log_z)``."""
    qp = as_qparam(q)
    ln_q = qp.ln_q
    log_mz = complex(log_z) + 1j * math.pi
    abs_log = log_mz.real

    def terms(k):
        return k * k * ln_q + k * log_mz - log_qq_table(ln_q, k.size)

    def ratio(k):
        return (2 * k + 1) * ln_q + abs_log - math.log(-math.expm1((k + 1) * ln_q))

    def mp_sum(n, dps):
        with mpmath.workdps(dps):
            qm, w = mpmath.mpf(qp.q), -mpmath.exp(mpmath.mpc(log_z))
            t, s = mpmath.mpc(1), mpmath.mpc(1)
            for k in range(n - 1):
                t *= qm ** (2 * k + 1) * w / (1 - qm ** (k + 1))
                s += t
            return s

    return sum_series(terms, ratio, pol, mp_sum=mp_sum)


def aq_ramanujan_certified(z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> SeriesSum:
    z = complex(z)
    if z == 0:
        return SeriesSum(LogComplex.one(), NEG_INF, 0.0, 1)
    return aq_series_log(cmath.log(z), q, pol)


def aq_ramanujan(z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> LogComplex:
    """The Ramanujan entire function ``A_q(z)``."""
    return aq_ramanujan_certified(z, q, pol).value


# ---------------------------------------------------------------------------
# J_nu^(2)


def jnu_series_log(
    nu: float, log_y: complex, q, pol: TruncationPolicy = DEFAULT_POLICY
) -> SeriesSum:
    """``sum q^{k^2+k nu} (-1)^k y^{2k} / (q, q^{nu+1}; q)_k`` with ``y = exp(log_y)``."""
    qp = as_qparam(q)
    ln_q = qp.ln_q
    log_y = complex(log_y)
    log_a = (nu + 1) * ln_q

    def terms(k):
        n = k.size
        return (
            (k * k + k * nu) * ln_q
            + 1j * math.pi * k
            + 2 * k * log_y
            - log_qq_table(ln_q, n)
            - log_shifted_table(ln_q, log_a, n)
        )

    def ratio(k):
        return (
            (2 * k + 1 + nu) * ln_q
            + 2 * log_y.real
            - math.log(-math.expm1((k + 1) * ln_q))
            - math.log(-math.expm1((k + nu + 1) * ln_q))
        )

    def mp_sum(n, dps):
        with mpmath.workdps(dps):
            qm, y2 = mpmath.mpf(qp.q), mpmath.exp(2 * mpmath.mpc(log_y))
            t, s = mpmath.mpc(1), mpmath.mpc(1)
            for k in range(n - 1):
                t *= -(qm ** (2 * k + 1 + nu)) * y2
                t /= (1 - qm ** (k + 1)) * (1 - qm ** (k + nu + 1))
                s += t
            return s

    return sum_series(terms, ratio, pol, mp_sum=mp_sum)


def _check_nu(nu: float) -> float:
    nu = float(nu)
    if not nu > -1:
        raise DomainError(f"nu must exceed -1, got {nu!r}")
    return nu


def jackson_bessel2_certified(nu: float, z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY):
    nu = _check_nu(nu)
    qp = as_qparam(q)
    z = complex(z)
    lp_num, e1 = log_qpoch_inf(math.exp((nu + 1) * qp.ln_q), qp.q, pol)
    lp_den, e2 = log_qpoch_inf(qp.q, qp.q, pol)
    pref = LogComplex.from_log(lp_num - lp_den)
    if z == 0:
        if nu == 0:
            return pref, e1 + e2
        if float(nu).is_integer():
            return LogComplex.zero(), 0.0
        raise BranchError("(z/2)^nu at z = 0 with non-integer nu")
    log_half = cmath.log(z / 2)
    ser = jnu_series_log(nu, log_half, qp, pol)
    val = pref * ser.value * LogComplex.from_log(nu * log_half)
    return val, e1 + e2 + ser.rel_err


def jackson_bessel2(nu: float, z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> LogComplex:
    """Jackson's q-Bessel function of the second kind ``J_nu^(2)(z; q)`` (principal power)."""
    return jackson_bessel2_certified(nu, z, q, pol)[0]


# ---------------------------------------------------------------------------
# envelopes


def _gauss(log_abs: float, ln_q: float) -> float:
    return -log_abs * log_abs / (2.0 * ln_q)


def log_envelope_bound(family, z: complex, q, nu: float | None = None) -> float:
    """Logarithm of :func:`envelope_bound`."""
    fam = QFunction(family.upper() if isinstance(family, str) else family)
    qp = as_qparam(q)
    z = complex(z)
    if z == 0:
        raise DomainError("envelope bounds need z != 0")
    ln_q = qp.ln_q
    la = math.log(abs(z))
    sq = math.exp(0.5 * ln_q)
    if fam is QFunction.EQ:
        return _gauss(la - ln_q, ln_q) - log_qpoch_inf(sq, qp.q)[0].real
    if fam is QFunction.AQ:
        lin = qp.q * abs(z) / qp.one_minus_q
        gauss = log_qpoch_inf(-sq, qp.q)[0].real + _gauss(la, ln_q)
        return min(lin, gauss)
    if nu is None:
        raise DomainError("JNU envelope needs nu")
    nu = _check_nu(nu)
    lead = log_qpoch_inf(-sq, qp.q)[0].real - log_qpoch_inf(qp.q, qp.q)[0].real
    inner = 2 * la + nu * ln_q - 2 * math.log(2)
    return lead + nu * (la - math.log(2)) + _gauss(inner, ln_q)


def envelope_bound(family, z: complex, q, nu: float | None = None) -> float:
    """Gaussian-in-``log|z|`` upper bound for ``|E_q|``, ``|A_q|`` or ``|J_nu^(2)|``.

    For ``AQ`` the smaller of the linear-exponential and Gaussian bounds is
    returned.
    """
    lb = log_envelope_bound(family, z, q, nu)
    return math.exp(lb) if lb < 709 else math.inf
