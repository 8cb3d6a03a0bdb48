"""Ismail-Masson, Stieltjes-Wigert and q-Laguerre polynomials.

Each polynomial is a finite sum whose terms span hundreds of orders of
magnitude for moderate degree, so the sums are formed in the log domain and
re-summed in mpmath when the binary64 result has cancelled.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np

from .core import EPS, NEG_INF, LogComplex, as_qparam, log_qpoch_inf, sum_log_terms
from .errors import DomainError, QuadratureNotConverged
from .qfunctions import log_qq_table, log_shifted_table
from .series import MP_TRIGGER, SeriesSum, _resum, log_rounding


class PolyKind(str, Enum):
    ISMAIL_MASSON = "ISMAIL_MASSON"
    STIELTJES_WIGERT = "STIELTJES_WIGERT"
    Q_LAGUERRE = "Q_LAGUERRE"


@dataclass(frozen=True)
class PolyFamily:
    tag: PolyKind
    alpha: float | None = None

    def __post_init__(self) -> None:
        tag = PolyKind(self.tag)
        object.__setattr__(self, "tag", tag)
        if tag is PolyKind.Q_LAGUERRE:
            if self.alpha is None or not self.alpha > -1:
                raise DomainError("q-Laguerre needs alpha > -1")
        elif self.alpha is not None:
            raise DomainError(f"{tag.value} takes no alpha")


def _check_n(n: int) -> int:
    if int(n) != n or n < 0:
        raise DomainError(f"degree must be a non-negative integer, got {n!r}")
    return int(n)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > -1:
        raise DomainError(f"alpha must exceed -1, got {alpha!r}")
    return alpha


def finite_sum(lt: np.ndarray, mp_sum=None) -> SeriesSum:
    """Sum a finite list of log-terms, falling back to mpmath under cancellation."""
    total, log_abs = sum_log_terms(lt)
    out = SeriesSum(total, log_rounding(lt), log_abs, lt.size)
    if mp_sum is not None and (out.value.is_zero or out.rel_err > MP_TRIGGER):
        out = _resum(out, NEG_INF, mp_sum)
    return out


# ---------------------------------------------------------------------------
# Ismail-Masson


def ismail_masson_terms(n: int, xi: complex, ln_q: float) -> np.ndarray:
    k = np.arange(n + 1)
    lqq = log_qq_table(ln_q, n + 1)
    return (
        lqq[n]
        + k * (k - n) * ln_q
        + 1j * math.pi * k
        + (n - 2 * k) * xi
        - lqq[k]
        - lqq[n - k]
    )


def _im_mp(n: int, xi: complex, q_float: float):
    def mp_sum(_n, dps):
        with mpmath.workdps(dps):
            q = mpmath.mpf(q_float)
            e = mpmath.exp(mpmath.mpc(xi))
            # term ratio of the q-binomial sum, starting from e^n
            t = e**n
            s = t
            for k in range(n):
                t *= -(1 - q ** (n - k)) / (1 - q ** (k + 1)) * q ** (2 * k + 1 - n) / (e * e)
                s += t
            return s

    return mp_sum


def ismail_masson_certified(n: int, xi: complex, q) -> SeriesSum:
    n = _check_n(n)
    qp = as_qparam(q)
    xi = complex(xi)
    return finite_sum(ismail_masson_terms(n, xi, qp.ln_q), _im_mp(n, xi, qp.q))


def ismail_masson(n: int, xi: complex, q) -> LogComplex:
    """``h_n(sinh xi | q)``; the argument is ``xi``, not ``sinh xi``."""
    return ismail_masson_certified(n, xi, q).value


def log_weight_im(x: float, q) -> float:
    qp = as_qparam(q)
    ash = math.asinh(float(x))
    return qp.ln_q / 8 + 0.5 * math.log(-2.0 / (math.pi * qp.ln_q)) + 2 * ash * ash / qp.ln_q


def weight_im(x: float, q) -> float:
    """Ismail-Masson weight; ``log(x + sqrt(x^2+1))`` is evaluated as ``asinh x``."""
    return math.exp(log_weight_im(x, q))


def _real_value(v: LogComplex) -> float:
    if v.is_zero:
        return 0.0
    sign = -1.0 if abs(v.phase) > math.pi / 2 else 1.0
    return sign * math.exp(v.log_mag)


def orthonormal_im(n: int, x: float, q) -> float:
    """``q^{n(n+1)/4} sqrt(w_im(x)/(q;q)_n) h_n(x|q)`` for real ``x``."""
    n = _check_n(n)
    qp = as_qparam(q)
    h = ismail_masson(n, math.asinh(float(x)), qp)
    if h.is_zero:
        return 0.0
    log_scale = n * (n + 1) / 4 * qp.ln_q + 0.5 * (log_weight_im(x, qp) - log_qq_table(qp.ln_q, n + 1)[n])
    return _real_value(h.scaled(log_scale))


# ---------------------------------------------------------------------------
# Stieltjes-Wigert


def stieltjes_wigert_terms(n: int, log_x: complex, ln_q: float) -> np.ndarray:
    k = np.arange(n + 1)
    lqq = log_qq_table(ln_q, n + 1)
    return k * k * ln_q + k * (log_x + 1j * math.pi) - lqq[k] - lqq[n - k]


def _sw_mp(n: int, x: complex | None, q_float: float, alpha: float | None = None, log_x: complex = 0j):
    # x = None means the argument is only known through its logarithm
    def mp_sum(_n, dps):
        with mpmath.workdps(dps):
            q = mpmath.mpf(q_float)
            mx = -(mpmath.mpc(x) if x is not None else mpmath.exp(mpmath.mpc(log_x)))
            qq_n = mpmath.fprod(1 - q**j for j in range(1, n + 1))
            t = 1 / qq_n
            if alpha is not None:
                qa = q ** (alpha + 1)
                t *= mpmath.fprod(1 - qa * q**j for j in range(n))
            # term ratio of the q-binomial sum
            s = t
            for k in range(n):
                t *= q ** (2 * k + 1) * mx * (1 - q ** (n - k)) / (1 - q ** (k + 1))
                if alpha is not None:
                    t *= q**alpha / (1 - qa * q**k)
                s += t
            return s

    return mp_sum


def _log_x(x: complex) -> complex:
    if x == 0:
        return complex(NEG_INF, 0.0)
    return cmath.log(x)


def stieltjes_wigert_certified(n: int, x: complex, q) -> SeriesSum:
    n = _check_n(n)
    qp = as_qparam(q)
    x = complex(x)
    if x == 0:
        return SeriesSum(LogComplex.from_log(-log_qq_table(qp.ln_q, n + 1)[n]), NEG_INF, 0.0, 1)
    lx = _log_x(x)
    return finite_sum(stieltjes_wigert_terms(n, lx, qp.ln_q), _sw_mp(n, x, qp.q))


def stieltjes_wigert_log(n: int, log_x: complex, q) -> SeriesSum:
    """``S_n(e^{log_x}; q)`` for arguments too large or small for a float."""
    n = _check_n(n)
    qp = as_qparam(q)
    log_x = complex(log_x)
    return finite_sum(stieltjes_wigert_terms(n, log_x, qp.ln_q), _sw_mp(n, None, qp.q, log_x=log_x))


def stieltjes_wigert(n: int, x: complex, q) -> LogComplex:
    """``S_n(x; q) = sum q^{k^2} (-x)^k / ((q;q)_k (q;q)_{n-k})``."""
    return stieltjes_wigert_certified(n, x, q).value


def log_weight_sw(x: float, q) -> float:
    qp = as_qparam(q)
    if not x > 0:
        raise DomainError("Stieltjes-Wigert weight needs x > 0")
    u = math.log(x) - 0.5 * qp.ln_q
    return 0.5 * math.log(-1.0 / (2 * math.pi * qp.ln_q)) + u * u / (2 * qp.ln_q)


def weight_sw(x: float, q) -> float:
    return math.exp(log_weight_sw(x, q))


def orthonormal_sw(n: int, x: float, q) -> float:
    """``sqrt(q^n (q;q)_n w_sw(x)) S_n(x; q)`` for ``x > 0``."""
    n = _check_n(n)
    qp = as_qparam(q)
    lw = log_weight_sw(x, qp)
    s = stieltjes_wigert(n, x, qp)
    return _real_value(s.scaled(0.5 * (n * qp.ln_q + log_qq_table(qp.ln_q, n + 1)[n] + lw)))


# ---------------------------------------------------------------------------
# q-Laguerre


def q_laguerre_terms(n: int, alpha: float, log_x: complex, ln_q: float) -> np.ndarray:
    k = np.arange(n + 1)
    lqq = log_qq_table(ln_q, n + 1)
    la = log_shifted_table(ln_q, (alpha + 1) * ln_q, n + 1)
    return (
        (k * k + alpha * k) * ln_q
        + k * (log_x + 1j * math.pi)
        + la[n]
        - lqq[k]
        - lqq[n - k]
        - la[k]
    )


def q_laguerre_certified(n: int, alpha: float, x: complex, q) -> SeriesSum:
    n = _check_n(n)
    alpha = _check_alpha(alpha)
    qp = as_qparam(q)
    x = complex(x)
    if x == 0:
        la = log_shifted_table(qp.ln_q, (alpha + 1) * qp.ln_q, n + 1)[n]
        return SeriesSum(LogComplex.from_log(la - log_qq_table(qp.ln_q, n + 1)[n]), NEG_INF, 0.0, 1)
    lx = _log_x(x)
    return finite_sum(q_laguerre_terms(n, alpha, lx, qp.ln_q), _sw_mp(n, x, qp.q, alpha))


def q_laguerre_log(n: int, alpha: float, log_x: complex, q) -> SeriesSum:
    n = _check_n(n)
    alpha = _check_alpha(alpha)
    qp = as_qparam(q)
    log_x = complex(log_x)
    lt = q_laguerre_terms(n, alpha, log_x, qp.ln_q)
    return finite_sum(lt, _sw_mp(n, None, qp.q, alpha, log_x=log_x))


def q_laguerre(n: int, alpha: float, x: complex, q) -> LogComplex:
    """``L_n^(alpha)(x; q)``, normalised so that ``L_n(0) = (q^{alpha+1};q)_n/(q;q)_n``."""
    return q_laguerre_certified(n, alpha, x, q).value


# ---------------------------------------------------------------------------
# envelope bounds along the scaled arguments


def log_poly_envelope(family: PolyFamily, n: int, z: complex, tau: float, q) -> float:
    """Log of the Gaussian bound on the scaled polynomial of degree ``n``.

    ``z`` and ``tau`` describe the scaled argument (``sinh xi_n`` for
    Ismail-Masson, ``x_n = z q^{-ns}`` or ``z q^{-ns-alpha}`` otherwise); the
    bound depends on ``|z|`` only.
    """
    qp = as_qparam(q)
    L = qp.ln_q
    ell = math.log(abs(z))
    lead = log_qpoch_inf(-math.exp(0.5 * L), qp.q)[0].real
    if family.tag is PolyKind.ISMAIL_MASSON:
        return lead + (4 * tau + 1) * n * ell - 2 * n * n * (tau + 0.5) ** 2 * L - 2 * ell * ell / L
    inv_qq = -log_qpoch_inf(qp.q, qp.q)[0].real
    return (
        lead
        + inv_qq
        + (2 * tau + 1) * n * ell
        - ell * ell / (2 * L)
        - (2 * tau * tau + 2 * tau + 1) * n * n * L
    )


# ---------------------------------------------------------------------------
# orthogonality quadrature


@dataclass(frozen=True)
class QuadratureConfig:
    rtol: float = 1e-10  # agreement of successive refinements, relative to int |f|
    tail: float = 1e-20  # integrand level (relative to peak) at which the range is cut
    initial_step: float = 0.25
    max_halvings: int = 12

    def __post_init__(self) -> None:
        if not 0 < self.rtol < 1 or not 0 < self.tail < 1:
            raise DomainError("quadrature tolerances must lie in (0, 1)")
        if not self.initial_step > 0 or self.max_halvings < 1:
            raise DomainError("bad quadrature resolution")


def _coefficients(kind: PolyKind, n: int, ln_q: float):
    """``(log|c_k|, sign_k, exponent_k)`` with the polynomial = sum c_k e^{exponent_k t}."""
    lqq = log_qq_table(ln_q, n + 1)
    k = np.arange(n + 1)
    if kind is PolyKind.ISMAIL_MASSON:
        logc = lqq[n] + k * (k - n) * ln_q - lqq[k] - lqq[n - k]
        return logc, (-1.0) ** k, (n - 2 * k).astype(float)
    logc = k * k * ln_q - lqq[k] - lqq[n - k]
    return logc, (-1.0) ** k, k.astype(float)


def _integrand_factory(kind: PolyKind, m: int, n: int, ln_q: float):
    cm = _coefficients(kind, m, ln_q)
    cn = _coefficients(kind, n, ln_q)
    logc = (cm[0][:, None] + cn[0][None, :]).ravel()
    sign = (cm[1][:, None] * cn[1][None, :]).ravel()
    expo = (cm[2][:, None] + cn[2][None, :]).ravel()
    if kind is PolyKind.ISMAIL_MASSON:
        const = ln_q / 8 + 0.5 * math.log(-2.0 / (math.pi * ln_q))

        def base(t):  # log of weight * jacobian, x = sinh t
            return const + 2 * t * t / ln_q + np.logaddexp(t, -t) - math.log(2)

    else:
        const = 0.5 * math.log(-1.0 / (2 * math.pi * ln_q))

        def base(t):  # x = e^u
            u = t - 0.5 * ln_q
            return const + u * u / (2 * ln_q) + t

    def f(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        e = logc[None, :] + expo[None, :] * t[:, None] + base(t)[:, None]
        vals = sign[None, :] * np.exp(e)
        return vals.sum(axis=1), np.abs(vals).sum(axis=1)

    def log_env(t: np.ndarray) -> np.ndarray:
        e = logc[None, :] + expo[None, :] * t[:, None] + base(t)[:, None]
        return np.logaddexp.reduce(e, axis=1)

    return f, log_env


def orthogonality_integral(family, m: int, n: int, q, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """``int p_m p_n w dx`` by trapezoid quadrature in Gaussian coordinates.

    Ismail-Masson uses ``x = sinh t``; Stieltjes-Wigert uses ``x = e^u``.
    """
    kind = family.tag if isinstance(family, PolyFamily) else PolyKind(family)
    if kind is PolyKind.Q_LAGUERRE:
        raise DomainError("no orthogonality weight is available for q-Laguerre")
    m, n = _check_n(m), _check_n(n)
    qp = as_qparam(q)
    f, log_env = _integrand_factory(kind, m, n, qp.ln_q)

    # locate the support from the log-envelope on a coarse grid
    width = math.sqrt(-qp.ln_q) * (12 + 2 * (m + n))
    centre = 0.0 if kind is PolyKind.ISMAIL_MASSON else -(m + n + 1) * qp.ln_q
    grid = np.linspace(centre - width, centre + width, 4001)
    env = log_env(grid)
    keep = env > env.max() + math.log(quad.tail)
    lo, hi = grid[keep][0] - 0.5, grid[keep][-1] + 0.5
    if keep[0] or keep[-1]:
        raise QuadratureNotConverged("integration window does not contain the integrand")

    def trap(h: float) -> tuple[float, float]:
        count = int(math.ceil((hi - lo) / h))
        t = lo + h * np.arange(count + 1)
        v, a = f(t)
        return h * (math.fsum(v) - 0.5 * (v[0] + v[-1])), h * math.fsum(a)

    h = quad.initial_step
    prev, _ = trap(h)
    for _ in range(quad.max_halvings):
        h /= 2
        cur, mass = trap(h)
        if abs(cur - prev) <= quad.rtol * mass + 16 * EPS * mass:
            return cur
        prev = cur
    raise QuadratureNotConverged(f"trapezoid refinements still differ by {abs(cur - prev):.3e}")


def orthogonality_target(family, n: int, q) -> float:
    """The diagonal norm ``int p_n^2 w dx`` predicted by the orthogonality relation."""
    kind = family.tag if isinstance(family, PolyFamily) else PolyKind(family)
    qp = as_qparam(q)
    lqq = log_qq_table(qp.ln_q, n + 1)[n]
    if kind is PolyKind.ISMAIL_MASSON:
        return math.exp(-n * (n + 1) / 2 * qp.ln_q + lqq)
    if kind is PolyKind.STIELTJES_WIGERT:
        return math.exp(-n * qp.ln_q - lqq)
    raise DomainError("no orthogonality relation for q-Laguerre")
