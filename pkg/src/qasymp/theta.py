"""Jacobi theta functions, the Dedekind eta function and their modular behaviour.

Internally every theta value is computed from two logarithms: ``log_nome``
(``pi*i*tau``, or ``ln q`` for the ``theta(z; q)`` notation) and ``log_z``
(``2*pi*i*v``, or ``Log z``).  Working with logarithms keeps arguments such as
``v/tau`` for tiny ``Im tau`` inside the representable range.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple

import mpmath
import numpy as np

from . import hp
from .core import (
    DEFAULT_POLICY,
    EPS,
    Certified,
    LogComplex,
    QParam,
    TruncationPolicy,
    as_qparam,
    log1m,
    log_qpoch_inf_logs,
    sum_log_terms,
)
from .errors import DomainError, NonConvergent
from .regimes import Regime

PI = math.pi
# relative rounding level above which theta sums are redone in mpmath
CANCELLATION_TRIGGER = 1e-14


class ThetaIndex(IntEnum):
    T1 = 1
    T2 = 2
    T3 = 3
    T4 = 4


@dataclass(frozen=True)
class TauParam:
    """Modular variable ``tau`` in the upper half plane and its nome ``e^{pi i tau}``."""

    tau: complex
    nome_q: complex = field(init=False)

    def __post_init__(self) -> None:
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise DomainError(f"Im(tau) must be positive, got {tau!r}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "nome_q", cmath.exp(1j * PI * tau))

    @property
    def log_nome(self) -> complex:
        return 1j * PI * self.tau


def _as_tau(tau) -> TauParam:
    return tau if isinstance(tau, TauParam) else TauParam(tau)


def _index(idx) -> int:
    try:
        return int(ThetaIndex(int(idx)))
    except (ValueError, TypeError) as exc:
        raise DomainError(f"theta index must be 1..4, got {idx!r}") from exc


# ---------------------------------------------------------------------------
# bilateral sums


def _log_terms(idx: int, log_nome: complex, log_z: complex, k: np.ndarray) -> np.ndarray:
    c = 0.5 if idx in (1, 2) else 0.0
    x = k + c
    lt = x * x * log_nome + x * log_z
    if idx in (1, 4):
        lt = lt + 1j * PI * (k % 2)
    if idx == 1:
        lt = lt - 0.5j * PI
    return lt


def theta_sum_logs(
    idx: int, log_nome: complex, log_z: complex, pol: TruncationPolicy = DEFAULT_POLICY, exact=None
) -> Certified:
    """Certified bilateral-sum value of ``theta_idx`` from ``(log_nome, log_z)``.

    ``exact=(v, tau)`` lets the high-precision fallback start from the
    unrounded inputs.
    """
    idx = _index(idx)
    log_nome, log_z = complex(log_nome), complex(log_z)
    alpha = -log_nome.real
    if not alpha > 0:
        raise DomainError("nome must satisfy |q| < 1")
    c = 0.5 if idx in (1, 2) else 0.0
    peak = log_z.real / (2.0 * alpha)  # maximiser of -alpha x^2 + x Re(log_z)
    width = math.sqrt((-math.log(pol.rel_tol) + 12.0) / alpha)
    kmin = math.floor(peak - c - width) - 1
    kmax = math.ceil(peak - c + width) + 1
    if kmax - kmin + 1 > pol.max_terms:
        raise NonConvergent(f"theta sum needs {kmax - kmin + 1} terms > max_terms")
    k = np.arange(kmin, kmax + 1)
    lt = _log_terms(idx, log_nome, log_z, k)
    total, log_abs = sum_log_terms(lt)

    # geometric tails beyond both ends: term ratios keep shrinking outward
    def tail(end_k: int, direction: int) -> float:
        x = end_k + c
        log_r = -alpha * (2 * direction * x + 1) + direction * log_z.real
        if log_r >= 0:
            raise NonConvergent("theta tail is not contracting")
        r = math.exp(log_r)
        return math.exp(lt[0 if direction < 0 else -1].real) * r / (1 - r)

    tail_abs = tail(kmax, +1) + tail(kmin, -1)
    spread = 4.0 * EPS * float(np.max(1.0 + np.abs(lt)))
    if total.is_zero:
        rel_round = math.inf
    else:
        rel_round = spread * math.exp(log_abs - total.log_mag)
    if rel_round > CANCELLATION_TRIGGER:
        total, rel_round = _theta_sum_mp(idx, log_nome, log_z, kmin, kmax, log_abs, total, exact)
    if total.is_zero or tail_abs == 0.0:
        rel_tail = 0.0
    else:
        rel_tail = math.exp(min(700.0, math.log(tail_abs) - total.log_mag))
    return Certified(total, rel_tail + rel_round)


def abs_scaled(v: LogComplex) -> float:
    return math.exp(v.log_mag) if v.log_mag < 700 else math.inf


def _theta_sum_mp(idx, log_nome, log_z, kmin, kmax, log_abs, approx, exact=None):
    """Redo a cancelling theta sum in mpmath, raising precision until stable."""
    lost = 17 if approx.is_zero else max(0, int((log_abs - approx.log_mag) / math.log(10)) + 1)
    dps = 30 + lost
    prev = None
    for _ in range(6):
        val = hp.theta_terms_sum(idx, log_nome, log_z, kmin, kmax, dps, exact)
        if prev is not None and (val.is_zero and prev.is_zero or val.rel_diff(prev) < 1e-15):
            return val, 10 ** (-(dps - lost - 5)) + 2 * EPS
        prev = val
        dps *= 2
    if prev.log_mag < log_abs - 0.5 * dps * math.log(10):
        # the window cancels to every precision tried: a zero of theta
        return LogComplex.zero(), 0.0
    return prev, 1e-13


def _exact_zero(idx: int, v: complex) -> bool:
    """``theta_1`` vanishes at integer ``v``, ``theta_2`` at half-integers (on the real axis)."""
    if v.imag != 0:
        return False
    if idx == 1:
        return float(v.real).is_integer()
    if idx == 2:
        return float(v.real - 0.5).is_integer()
    return False


def theta_sum(idx, v: complex, tau, pol: TruncationPolicy = DEFAULT_POLICY) -> LogComplex:
    """``theta_idx(v | tau)`` from its bilateral series."""
    idx, v, t = _index(idx), complex(v), _as_tau(tau)
    if _exact_zero(idx, v):
        return LogComplex.zero()
    return theta_sum_logs(idx, t.log_nome, 2j * PI * v, pol, exact=(v, t.tau)).value


# ---------------------------------------------------------------------------
# triple products


def _log_sin_pi_v(log_z: complex) -> complex:
    """``log sin(pi v)`` where ``log_z = 2 pi i v``, stable for large ``|Im v|``."""
    if log_z.real <= 0:  # |z| <= 1
        return -0.5 * log_z + complex(log1m(np.array([cmath.exp(log_z)]))[0]) + cmath.log(0.5j)
    return 0.5 * log_z + complex(log1m(np.array([cmath.exp(-log_z)]))[0]) - cmath.log(2j)


def _log_cos_pi_v(log_z: complex) -> complex:
    if log_z.real <= 0:
        return -0.5 * log_z + complex(log1m(np.array([-cmath.exp(log_z)]))[0]) - math.log(2)
    return 0.5 * log_z + complex(log1m(np.array([-cmath.exp(-log_z)]))[0]) - math.log(2)


def theta_product_logs(
    idx: int, log_nome: complex, log_z: complex, pol: TruncationPolicy = DEFAULT_POLICY
) -> Certified:
    idx = _index(idx)
    log_nome, log_z = complex(log_nome), complex(log_z)
    if not log_nome.real < 0:
        raise DomainError("nome must satisfy |q| < 1")
    log_p = 2.0 * log_nome
    parts = [log_qpoch_inf_logs(log_p, log_p, pol)]
    if idx in (1, 2):
        sign = 0j if idx == 1 else 1j * PI
        parts.append(log_qpoch_inf_logs(log_p + log_z + sign, log_p, pol))
        parts.append(log_qpoch_inf_logs(log_p - log_z + sign, log_p, pol))
        trig = _log_sin_pi_v(log_z) if idx == 1 else _log_cos_pi_v(log_z)
        head = math.log(2.0) + 0.25 * log_nome + trig
    else:
        sign = 1j * PI if idx == 3 else 0j
        parts.append(log_qpoch_inf_logs(log_nome + log_z + sign, log_p, pol))
        parts.append(log_qpoch_inf_logs(log_nome - log_z + sign, log_p, pol))
        head = 0j
    total = head + sum(p[0] for p in parts)
    err = sum(p[1] for p in parts) + 8 * EPS
    return Certified(LogComplex.from_log(total), err)


def theta_product(idx, v: complex, tau, pol: TruncationPolicy = DEFAULT_POLICY) -> LogComplex:
    """``theta_idx(v | tau)`` from Jacobi's triple product."""
    idx, v, t = _index(idx), complex(v), _as_tau(tau)
    if _exact_zero(idx, v):
        return LogComplex.zero()
    return theta_product_logs(idx, t.log_nome, 2j * PI * v, pol).value


def theta_z_certified(idx, z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> Certified:
    idx, z = _index(idx), complex(z)
    if z == 0:
        raise DomainError("theta(z; q) needs z != 0")
    qp = as_qparam(q)
    if (idx == 1 and z == 1) or (idx == 2 and z == -1):
        return Certified(LogComplex.zero(), 0.0)
    return theta_sum_logs(idx, qp.ln_q, cmath.log(z), pol)


def theta_z(idx, z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> LogComplex:
    """``theta_idx(z; q)`` with ``z = e^{2 pi i v}`` and real nome ``q``."""
    return theta_z_certified(idx, z, q, pol).value


def theta_z_log(idx, log_z: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> Certified:
    """``theta_idx`` at ``z = exp(log_z)``; avoids forming huge or tiny ``z``."""
    qp = as_qparam(q)
    return theta_sum_logs(_index(idx), qp.ln_q, complex(log_z), pol)


# ---------------------------------------------------------------------------
# modular transformations and eta

_PARTNER = {1: 1, 2: 4, 3: 3, 4: 2}


def theta_modular_residual(idx, v: complex, tau, pol: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Relative residual of ``theta_idx(v/tau | -1/tau) = pref * theta_partner(v | tau)``."""
    idx, v, t = _index(idx), complex(v), _as_tau(tau)
    tau_c = t.tau
    if _exact_zero(idx, v / tau_c):
        lhs = LogComplex.zero()
    else:
        t_img = TauParam(-1.0 / tau_c)

        def image():  # v/tau and -1/tau without the float rounding
            vv, tt = mpmath.mpc(v), mpmath.mpc(tau_c)
            return vv / tt, -1 / tt

        lhs = theta_sum_logs(idx, t_img.log_nome, 2j * PI * (v / tau_c), pol, exact=image).value
    # sqrt(tau/i) with the principal branch; tau/i has positive real part
    log_pref = 0.5 * cmath.log(tau_c / 1j) + 1j * PI * v * v / tau_c
    if idx == 1:
        log_pref += -0.5j * PI
    rhs = theta_sum(_PARTNER[idx], v, t, pol) * LogComplex.from_log(log_pref)
    if abs(lhs) < 1e-300 and abs(rhs) < 1e-300 and lhs.log_mag < -690 and rhs.log_mag < -690:
        return 0.0
    return lhs.rel_diff(rhs)


def dedekind_eta_certified(tau, pol: TruncationPolicy = DEFAULT_POLICY) -> Certified:
    t = _as_tau(tau)
    log_p = 2.0 * t.log_nome
    lg, err = log_qpoch_inf_logs(log_p, log_p, pol)
    return Certified(LogComplex.from_log(t.log_nome / 12.0 + lg), err)


def dedekind_eta(tau, pol: TruncationPolicy = DEFAULT_POLICY) -> LogComplex:
    """``eta(tau) = e^{pi i tau/12} prod_{k>=1} (1 - e^{2 pi i k tau})``."""
    return dedekind_eta_certified(tau, pol).value


class EtaRegime(NamedTuple):
    q: QParam
    qpoch_value: LogComplex
    predicted: LogComplex
    rel_err_rate: float
    rel_err: float  # |qpoch_value/predicted - 1|, resolved in extended precision


def eta_regime_expansion(regime: Regime, n: int) -> EtaRegime:
    """Compare ``(q;q)_inf`` with its closed form as ``q -> 1`` (power or log regime).

    With height ``H = gamma n^a`` (power) or ``gamma log n`` (log) one has
    ``q = exp(-2 pi / H)`` and ``(q;q)_inf ~ sqrt(H) exp(pi/(12H) - pi H/12)``
    up to a relative error of order ``exp(-2 pi H)``.
    """
    if regime.kind not in ("power", "log"):
        raise DomainError("eta regimes are 'power' or 'log'")
    H = regime.scale(n)
    q = QParam.from_log(-2.0 * PI / H)
    actual = LogComplex.from_log(log_qpoch_inf_logs(q.ln_q, q.ln_q)[0])
    predicted = LogComplex(0.5 * math.log(H) + PI / (12 * H) - PI * H / 12)
    rate = math.exp(-2.0 * PI * H)
    dps = hp.dps_for(rate)
    with mpmath.workdps(dps):
        Hm = mpmath.mpf(regime.gamma) * (
            mpmath.mpf(n) ** mpmath.mpf(regime.a) if regime.kind == "power" else mpmath.log(n)
        )
        qm = mpmath.exp(-2 * mpmath.pi / Hm)
        act = hp.qpoch_inf(qm, qm, dps)
        pred = mpmath.sqrt(Hm) * mpmath.exp(mpmath.pi / (12 * Hm) - mpmath.pi * Hm / 12)
        err = hp.rel_err(act, pred)
    return EtaRegime(q, actual, predicted, rate, err)


# ---------------------------------------------------------------------------
# envelope bounds for theta(z; q)


def log_theta_envelope(idx, z: complex, q) -> float:
    """Log of the Gaussian envelope bounding ``|theta_idx(z; q)|``."""
    idx = _index(idx)
    if z == 0:
        raise DomainError("envelope needs z != 0")
    qp = as_qparam(q)
    lz = math.log(abs(z))
    lead = log_qpoch_inf_logs(2 * qp.ln_q, 2 * qp.ln_q)[0].real
    odd = log_qpoch_inf_logs(qp.ln_q, 2 * qp.ln_q)[0].real
    gauss = -lz * lz / (2 * qp.ln_q)
    if idx in (3, 4):
        return lead - 2 * odd - 0.5 * qp.ln_q + gauss
    cosh_log = abs(0.5 * lz) + math.log1p(math.exp(-abs(lz))) - math.log(2)
    return math.log(2) + 0.25 * qp.ln_q + lead + cosh_log - 2 * odd + gauss


def theta_envelope(idx, z: complex, q) -> float:
    """Upper bound for ``|theta_idx(z; q)|`` (Gaussian in ``log|z|``)."""
    return math.exp(log_theta_envelope(idx, z, q))
