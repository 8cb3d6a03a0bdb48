"""Log-domain complex numbers and q-shifted factorials.

Everything in the theorem normalizations lives on scales like ``q^{-n^2 s}``,
which overflows binary64 already for ``q = 1/2, n = 40``.  Values are therefore
carried as ``(log|v|, arg v)`` pairs and only leave the log domain at the end.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, HypothesisViolated, NonConvergent, PoleError

EPS = np.finfo(float).eps
TWO_PI = 2.0 * math.pi
NEG_INF = -math.inf


def wrap_phase(phase: float) -> float:
    """Reduce an angle to the half-open interval (-pi, pi]."""
    if not math.isfinite(phase):
        raise DomainError(f"non-finite phase {phase!r}")
    r = math.remainder(phase, TWO_PI)
    return math.pi if r <= -math.pi else r


@dataclass(frozen=True, slots=True)
class LogComplex:
    """A complex number stored as ``exp(log_mag + i*phase)``.

    ``log_mag == -inf`` encodes zero, in which case the phase is forced to 0.
    """

    log_mag: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        lm = float(self.log_mag)
        if math.isnan(lm) or lm == math.inf:
            raise DomainError(f"invalid log magnitude {self.log_mag!r}")
        object.__setattr__(self, "log_mag", lm)
        ph = 0.0 if lm == NEG_INF else wrap_phase(float(self.phase))
        object.__setattr__(self, "phase", ph)

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls) -> LogComplex:
        return cls(NEG_INF, 0.0)

    @classmethod
    def one(cls) -> LogComplex:
        return cls(0.0, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> LogComplex:
        z = complex(z)
        if z == 0:
            return cls.zero()
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError(f"non-finite value {z!r}")
        # math.hypot avoids spurious overflow for |z| near the float limit
        return cls(math.log(math.hypot(z.real, z.imag)), math.atan2(z.imag, z.real))

    @classmethod
    def from_log(cls, w: complex) -> LogComplex:
        """The number ``exp(w)`` for a complex logarithm ``w``."""
        w = complex(w)
        if w.real == NEG_INF:
            return cls.zero()
        return cls(w.real, w.imag)

    # queries ------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.log_mag == NEG_INF

    def log(self) -> complex:
        """Principal logarithm (real part may be ``-inf``)."""
        return complex(self.log_mag, self.phase)

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        return cmath.rect(math.exp(self.log_mag), self.phase)

    def __abs__(self) -> float:
        return 0.0 if self.is_zero else math.exp(self.log_mag)

    # arithmetic ---------------------------------------------------------
    def __mul__(self, other: LogComplex) -> LogComplex:
        other = _coerce(other)
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag + other.log_mag, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other: LogComplex) -> LogComplex:
        other = _coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogComplex")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag - other.log_mag, self.phase - other.phase)

    def __rtruediv__(self, other: LogComplex) -> LogComplex:
        return _coerce(other) / self

    def __neg__(self) -> LogComplex:
        if self.is_zero:
            return self
        return LogComplex(self.log_mag, self.phase + math.pi)

    def conjugate(self) -> LogComplex:
        return LogComplex(self.log_mag, -self.phase)

    def __pow__(self, p: float) -> LogComplex:
        """Principal power ``exp(p * Log(self))`` for real ``p``."""
        if self.is_zero:
            if p > 0:
                return LogComplex.zero()
            if p == 0:
                return LogComplex.one()
            raise ZeroDivisionError("negative power of zero")
        return LogComplex(p * self.log_mag, p * self.phase)

    def __add__(self, other: LogComplex) -> LogComplex:
        other = _coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        top = max(self.log_mag, other.log_mag)
        s = cmath.rect(math.exp(self.log_mag - top), self.phase) + cmath.rect(
            math.exp(other.log_mag - top), other.phase
        )
        return LogComplex.from_complex(s).scaled(top)

    __radd__ = __add__

    def __sub__(self, other: LogComplex) -> LogComplex:
        return self + (-_coerce(other))

    def scaled(self, log_factor: float) -> LogComplex:
        """Multiply by the positive real ``exp(log_factor)``."""
        if self.is_zero:
            return self
        return LogComplex(self.log_mag + log_factor, self.phase)

    def rel_diff(self, other: LogComplex) -> float:
        """``|self - other| / |other|``, computed without leaving a common scale."""
        other = _coerce(other)
        if other.is_zero:
            return 0.0 if self.is_zero else math.inf
        if self.is_zero:
            return 1.0
        d = self.log_mag - other.log_mag
        if d > 700:
            return math.inf
        return abs(cmath.rect(math.exp(d), self.phase - other.phase) - 1.0)

    def __repr__(self) -> str:
        return f"LogComplex(log_mag={self.log_mag!r}, phase={self.phase!r})"


def _coerce(x) -> LogComplex:
    if isinstance(x, LogComplex):
        return x
    return LogComplex.from_complex(x)


def abs_diff(a: LogComplex, b: LogComplex) -> float:
    """``|a - b|`` as a float, evaluated on the scale of the larger operand."""
    if a.is_zero and b.is_zero:
        return 0.0
    top = max(a.log_mag, b.log_mag)
    za = a.scaled(-top).to_complex()
    zb = b.scaled(-top).to_complex()
    d = abs(za - zb)
    if d == 0.0:
        return 0.0
    return math.exp(math.log(d) + top)


@dataclass(frozen=True, slots=True)
class QParam:
    """The base ``q`` in (0, 1) together with its logarithm."""

    q: float
    ln_q: float = field(default=math.nan)

    def __post_init__(self) -> None:
        q = float(self.q)
        if not 0.0 < q < 1.0:
            raise DomainError(f"q must lie in (0, 1), got {q!r}")
        ln_q = float(self.ln_q)
        if math.isnan(ln_q):
            ln_q = math.log(q)
        elif not ln_q < 0:
            raise DomainError("ln_q must be negative")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "ln_q", ln_q)

    @classmethod
    def from_log(cls, ln_q: float) -> QParam:
        """Build from ``ln q`` directly; keeps full accuracy when q is near 1."""
        if not ln_q < 0:
            raise DomainError("ln q must be negative")
        return cls(math.exp(ln_q), ln_q)

    def power(self, x: float) -> float:
        return math.exp(x * self.ln_q)

    @property
    def one_minus_q(self) -> float:
        return -math.expm1(self.ln_q)


def as_qparam(q) -> QParam:
    return q if isinstance(q, QParam) else QParam(q)


@dataclass(frozen=True, slots=True)
class TruncationPolicy:
    rel_tol: float = 1e-16
    max_terms: int = 10**6

    def __post_init__(self) -> None:
        if not 0.0 < self.rel_tol < 1.0:
            raise DomainError("rel_tol must lie in (0, 1)")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")


DEFAULT_POLICY = TruncationPolicy()


class Certified(NamedTuple):
    """A value with a bound on its relative error (truncation plus rounding)."""

    value: LogComplex
    rel_err: float


# ---------------------------------------------------------------------------
# vectorised log-domain kernels


def log1m(x: np.ndarray) -> np.ndarray:
    """Elementwise principal ``log(1 - x)``, accurate for small ``|x|``."""
    x = np.asarray(x, dtype=complex)
    xr, xi = x.real, x.imag
    small = np.abs(x) < 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        # near x = 1 the factor 1 - Re x is exact, so form |1-x|^2 directly
        near = 0.5 * np.log((1.0 - xr) ** 2 + xi * xi)
        far = 0.5 * np.log1p(xi * xi + xr * (xr - 2.0))
    re = np.where(small, far, near)
    im = np.arctan2(-xi, 1.0 - xr)
    return re + 1j * im


def _log1m_rounding(x: np.ndarray) -> np.ndarray:
    """Per-factor relative rounding estimate for ``log1m``."""
    ax = np.abs(x)
    den = np.abs(1.0 - x) ** 2
    with np.errstate(divide="ignore"):
        return EPS * (2.0 + (2.0 * ax + ax * ax) / den)


class LogSum(NamedTuple):
    value: LogComplex
    log_abs_sum: float  # log of sum of |terms|, for rounding estimates


def sum_log_terms(log_terms: np.ndarray) -> LogSum:
    """Sum ``exp(log_terms)`` without overflow, using exactly rounded accumulation."""
    lt = np.asarray(log_terms, dtype=complex)
    if lt.size == 0:
        return LogSum(LogComplex.zero(), NEG_INF)
    re = lt.real
    finite = re > NEG_INF
    if not finite.any():
        return LogSum(LogComplex.zero(), NEG_INF)
    top = float(re[finite].max())
    w = np.where(finite, np.exp(np.where(finite, re, 0.0) - top), 0.0)
    ph = np.where(finite, np.remainder(lt.imag, TWO_PI), 0.0)
    s = complex(math.fsum(w * np.cos(ph)), math.fsum(w * np.sin(ph)))
    value = LogComplex.from_complex(s).scaled(top)
    return LogSum(value, top + math.log(math.fsum(w)))


def log_qpoch_table(a: complex, p: complex, n: int) -> np.ndarray:
    """``log (a;p)_k`` for ``k = 0..n`` (complex base allowed, ``|p| < 1``)."""
    if n == 0:
        return np.zeros(1, dtype=complex)
    k = np.arange(n)
    factors = a * np.exp(k * cmath.log(p)) if p != 0 else np.where(k == 0, a, 0)
    out = np.empty(n + 1, dtype=complex)
    out[0] = 0
    out[1:] = np.cumsum(log1m(factors))
    return out


def _qpoch_terms_needed(abs_a: float, abs_p: float, pol: TruncationPolicy) -> int:
    if abs_a == 0.0 or abs_p == 0.0:
        return 1
    # need |a| p^K < rel_tol (1-p)/2, which implies both truncation tests
    target = pol.rel_tol * (1.0 - abs_p) / 2.0
    if abs_a < target:
        return 0
    return int(math.floor(math.log(target / abs_a) / math.log(abs_p))) + 1


def log_qpoch_inf(a: complex, p: complex, pol: TruncationPolicy = DEFAULT_POLICY):
    """``(log (a;p)_inf, relative error bound)`` for complex ``a`` and ``|p| < 1``."""
    a, p = complex(a), complex(p)
    if a == 0:
        return 0j, 0.0
    if p == 0:
        return complex(log1m(np.array([a]))[0]), 4 * EPS
    if a.imag == 0 and p.imag == 0:
        # keep real data real so the phase comes out exactly 0 or pi
        abs_p = abs(p.real)
        if not abs_p < 1.0:
            raise DomainError("base must satisfy |p| < 1")
        K = _terms_or_raise(abs(a.real), abs_p, pol)
        x = a.real * np.power(p.real, np.arange(K))
        tail = 2.0 * abs(a.real) * abs_p**K / (1.0 - abs_p)
        return _log_prod(x, tail)
    return log_qpoch_inf_logs(cmath.log(a), cmath.log(p), pol)


def _terms_or_raise(abs_a: float, abs_p: float, pol: TruncationPolicy) -> int:
    K = _qpoch_terms_needed(abs_a, abs_p, pol)
    if K > pol.max_terms:
        raise NonConvergent(f"(a;q)_inf needs {K} factors > max_terms={pol.max_terms}")
    return K


def _log_prod(x: np.ndarray, tail: float):
    if x.size == 0:
        return 0j, tail
    logs = log1m(x)
    if np.isneginf(logs.real).any():
        return complex(NEG_INF, 0.0), 0.0
    rounding = float(math.fsum(_log1m_rounding(x))) + x.size * EPS
    return complex(math.fsum(logs.real), math.fsum(logs.imag)), float(tail + rounding)


def log_qpoch_inf_logs(log_a: complex, log_p: complex, pol: TruncationPolicy = DEFAULT_POLICY):
    """As :func:`log_qpoch_inf`, with ``a`` and ``p`` given by logarithms."""
    log_a, log_p = complex(log_a), complex(log_p)
    if not log_p.real < 0:
        raise DomainError("base must satisfy |p| < 1")
    if log_a.real == NEG_INF:
        return 0j, 0.0
    abs_p = math.exp(log_p.real)
    if log_a.real < 0:
        K = _terms_or_raise(math.exp(log_a.real), abs_p, pol)
    else:
        # factors with |a p^k| >= 1 come first; count them from the logs
        big = math.floor(-log_a.real / log_p.real) + 1
        K = big + _terms_or_raise(math.exp(log_a.real + big * log_p.real), abs_p, pol)
        if K > pol.max_terms:
            raise NonConvergent(f"(a;q)_inf needs {K} factors > max_terms={pol.max_terms}")
    lx = log_a + np.arange(K) * log_p
    tail = 2.0 * math.exp(log_a.real + K * log_p.real) / (1.0 - abs_p)
    large = lx.real > 0
    if not large.any():
        return _log_prod(np.exp(lx), tail)
    # 1 - x = (-x)(1 - 1/x) keeps huge factors in range
    small_part, err = _log_prod(np.exp(lx[~large]), tail)
    inv = np.exp(-lx[large])
    big_logs = lx[large] + 1j * math.pi + log1m(inv)
    if np.isneginf(big_logs.real).any():
        return complex(NEG_INF, 0.0), 0.0
    err += float(math.fsum(_log1m_rounding(inv))) + EPS * float(np.sum(np.abs(lx[large])))
    total = complex(math.fsum(big_logs.real), math.fsum(np.remainder(big_logs.imag, 2 * math.pi)))
    return small_part + total, err


# ---------------------------------------------------------------------------
# public operations


def qpoch_finite(a: complex, q, n: int) -> LogComplex:
    """``(a;q)_n = prod_{k<n} (1 - a q^k)`` in the log domain."""
    if n < 0:
        raise DomainError("n must be non-negative")
    qp = as_qparam(q)
    if n == 0:
        return LogComplex.one()
    k = np.arange(n)
    x = complex(a) * np.exp(k * qp.ln_q)
    logs = log1m(x)
    if np.isneginf(logs.real).any():
        return LogComplex.zero()
    return LogComplex(math.fsum(logs.real), math.fsum(logs.imag))


def qpoch_infinite_certified(a: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> Certified:
    qp = as_qparam(q)
    lg, err = log_qpoch_inf(a, qp.q, pol)
    return Certified(LogComplex.from_log(lg), err)


def qpoch_infinite(a: complex, q, pol: TruncationPolicy = DEFAULT_POLICY) -> LogComplex:
    """``(a;q)_inf``, truncated once the Lemma-1 tail bound drops below ``rel_tol``."""
    return qpoch_infinite_certified(a, q, pol).value


def lemma1_bounds(z: complex, q, n: int) -> tuple[float, float]:
    """Bounds on ``(z q^n;q)_inf - 1`` and ``1/(z q^n;q)_inf - 1``.

    Valid only when ``0 < |z| q^n / (1-q) < 1/2``; raises ``HypothesisViolated``
    otherwise.
    """
    qp = as_qparam(q)
    x = abs(z) * math.exp(n * qp.ln_q) / qp.one_minus_q
    if not 0.0 < x < 0.5:
        raise HypothesisViolated(f"|z| q^n/(1-q) = {x!r} is not in (0, 1/2)")
    b = 2.0 * x
    return b, b


def qgamma(x: float, q, pol: TruncationPolicy = DEFAULT_POLICY) -> LogComplex:
    """The q-Gamma function ``(q;q)_inf / (q^x;q)_inf * (1-q)^(1-x)``."""
    qp = as_qparam(q)
    if x <= 0 and float(x).is_integer():
        raise PoleError(f"q-Gamma has a pole at x={x!r}")
    num = qpoch_infinite(qp.q, qp, pol)
    den = qpoch_infinite(math.exp(x * qp.ln_q), qp, pol)
    return (num / den).scaled((1.0 - x) * math.log(qp.one_minus_q))
