"""Plancherel-Rotach type asymptotics with explicit remainder bounds.

For each family the scaled function is divided by its exact normalization,
compared with the theta (or q-function) main term and the difference is
checked against the printed bound.  The large prefactors never leave the log
domain; only the O(1) normalized values are compared in linear scale.

Case numbers follow the hypothesis content:

1. ``tau > 0``
2. ``tau = 0``, ``n theta = m + lam`` exactly
3. ``tau = 0``, ``n theta = m + beta + b_n``
4. ``-n tau = m + lam``, ``n theta = m1 + lam1`` exactly
5. ``-n tau = m + lam`` exactly, ``n theta = m1 + beta + b_n``
6. ``-n tau = m + beta + a_n``, ``n theta = m1 + lam`` exactly
7. ``-n tau = m + beta1 + a_n``, ``n theta = m1 + beta2 + b_n``

E_q, A_q and J_nu^(2) have no case 2.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import mpmath
import numpy as np

from . import hp
from .core import (
    DEFAULT_POLICY,
    NEG_INF,
    LogComplex,
    QParam,
    abs_diff,
    as_qparam,
    log_qpoch_inf_logs,
)
from . import diophantine
from .diophantine import AdmissibleIndex, SymbolicReal, _exact_residual, as_real
from .errors import (
    CaseNotStated,
    DomainError,
    HypothesisViolated,
    InternalDisagreement,
    NotApplicable,
)
from .qfunctions import aq_series_log, eq_series_log, jnu_series_log, log_qq_table, log_shifted_table
from .qpolynomials import finite_sum, ismail_masson_certified, q_laguerre_log, stieltjes_wigert_log
from .regimes import Regime
from .series import sum_series
from .theta import theta_sum_logs

PI = math.pi


class FamilyTag(str, Enum):
    QEXP = "QEXP"
    RAMANUJAN = "RAMANUJAN"
    QBESSEL2 = "QBESSEL2"
    ISMAIL_MASSON = "ISMAIL_MASSON"
    STIELTJES_WIGERT = "STIELTJES_WIGERT"
    QLAGUERRE = "QLAGUERRE"


_ALIASES = {
    "qexp": FamilyTag.QEXP,
    "eq": FamilyTag.QEXP,
    "ramanujan": FamilyTag.RAMANUJAN,
    "rf": FamilyTag.RAMANUJAN,
    "aq": FamilyTag.RAMANUJAN,
    "qbessel2": FamilyTag.QBESSEL2,
    "qb": FamilyTag.QBESSEL2,
    "jnu": FamilyTag.QBESSEL2,
    "ismail_masson": FamilyTag.ISMAIL_MASSON,
    "im": FamilyTag.ISMAIL_MASSON,
    "stieltjes_wigert": FamilyTag.STIELTJES_WIGERT,
    "sw": FamilyTag.STIELTJES_WIGERT,
    "qlaguerre": FamilyTag.QLAGUERRE,
    "ql": FamilyTag.QLAGUERRE,
}


@dataclass(frozen=True)
class Family:
    """A function family; ``param`` is ``nu`` for QBESSEL2 and ``alpha`` for QLAGUERRE."""

    tag: FamilyTag
    param: float | None = None

    def __post_init__(self) -> None:
        tag = FamilyTag(self.tag)
        object.__setattr__(self, "tag", tag)
        if tag in (FamilyTag.QBESSEL2, FamilyTag.QLAGUERRE):
            if self.param is None:
                object.__setattr__(self, "param", 0.0)
            p = float(self.param)
            if not p > -1:
                name = "nu" if tag is FamilyTag.QBESSEL2 else "alpha"
                raise DomainError(f"{name} must exceed -1, got {p!r}")
            object.__setattr__(self, "param", p)
        elif self.param is not None:
            raise DomainError(f"{tag.value} takes no parameter")

    @classmethod
    def parse(cls, text: str) -> Family:
        """``qexp``, ``im``, ``qbessel2:nu=0.5``, ``ql:alpha=1`` and similar."""
        name, _, rest = text.strip().partition(":")
        try:
            tag = _ALIASES[name.strip().lower()]
        except KeyError:
            try:
                tag = FamilyTag(name.strip().upper())
            except ValueError as exc:
                raise DomainError(f"unknown family {text!r}") from exc
        param = None
        if rest:
            key, eq, val = rest.partition("=")
            if not eq or key.strip() not in ("nu", "alpha"):
                raise DomainError(f"bad family parameter {rest!r}")
            try:
                param = float(val)
            except ValueError as exc:
                raise DomainError(f"bad family parameter {rest!r}") from exc
        return cls(tag, param)

    def describe(self) -> str:
        if self.tag is FamilyTag.QBESSEL2:
            return f"QBESSEL2(nu={self.param!r})"
        if self.tag is FamilyTag.QLAGUERRE:
            return f"QLAGUERRE(alpha={self.param!r})"
        return self.tag.value


def as_family(family) -> Family:
    if isinstance(family, Family):
        return family
    if isinstance(family, FamilyTag):
        return Family(family)
    return Family.parse(str(family))


@dataclass(frozen=True)
class _Geometry:
    """Shape of the theta main term ``theta_4(z^ez q^{c*shift} e^{-2 pi i phi}; q^nome)``."""

    ez: int
    c: float
    nome: float
    cases: tuple[int, ...]
    consts: dict
    tau_low: float  # lower end of the tau-range for cases 4-7


_POLY_CASES = (1, 2, 3, 4, 5, 6, 7)
_FN_CASES = (1, 3, 4, 5, 6, 7)

_GEOMETRY = {
    FamilyTag.QEXP: _Geometry(-1, 1.0, 0.5, _FN_CASES, {4: 4, 5: 48, 6: 6, 7: 54}, -math.inf),
    FamilyTag.RAMANUJAN: _Geometry(-1, 2.0, 1.0, _FN_CASES, {4: 4, 5: 48, 6: 12, 7: 54}, -math.inf),
    FamilyTag.QBESSEL2: _Geometry(-2, 2.0, 1.0, _FN_CASES, {4: 12, 5: 48, 6: 12, 7: 156}, -math.inf),
    FamilyTag.ISMAIL_MASSON: _Geometry(2, 2.0, 1.0, _POLY_CASES, {4: 28, 5: 24, 6: 12, 7: 54}, -0.5),
    FamilyTag.STIELTJES_WIGERT: _Geometry(1, 2.0, 1.0, _POLY_CASES, {4: 12, 5: 48, 6: 36, 7: 156}, -1.0),
    FamilyTag.QLAGUERRE: _Geometry(1, 2.0, 1.0, _POLY_CASES, {4: 60, 5: 60, 6: 180, 7: 180}, -1.0),
}

# the remainder label the theorems attach to each case (E_q, A_q and J skip 2)
REMAINDER_LABEL = {c: c for c in _POLY_CASES}


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ScalingSpec:
    """``tau`` and ``theta`` of the scaling ``s``; exact inputs stay exact."""

    tau: object
    theta: object
    family: Family

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", as_real(self.tau))
        object.__setattr__(self, "theta", as_real(self.theta))
        object.__setattr__(self, "family", as_family(self.family))

    def s(self, q) -> complex:
        """The complex scaling exponent for this family at base ``q``."""
        ln_q = as_qparam(q).ln_q
        t, th = float(self.tau), float(self.theta)
        tag = self.family.tag
        if tag is FamilyTag.QEXP:
            return complex(t, 2 * PI * th / ln_q)
        if tag is FamilyTag.RAMANUJAN:
            return complex(2 * t, 2 * PI * th / ln_q)
        if tag is FamilyTag.QBESSEL2:
            return complex(t, PI * th / ln_q)
        if tag is FamilyTag.ISMAIL_MASSON:
            return complex((1 + 2 * t) / 2, PI * th / ln_q)
        return complex(2 * t + 2, 2 * PI * th / ln_q)


_REQUIRED = {
    1: (),
    2: ("lam",),
    3: ("beta",),
    4: ("lam", "lam1"),
    5: ("lam", "beta"),
    6: ("beta", "lam"),
    7: ("beta1", "beta2"),
}


@dataclass(frozen=True)
class CaseParams:
    case_id: int
    lam: object = None
    lam1: object = None
    beta: object = None
    beta1: object = None
    beta2: object = None
    rho: float = 1.0
    idx: AdmissibleIndex | None = None

    def __post_init__(self) -> None:
        if self.case_id not in _REQUIRED:
            raise DomainError(f"case must be 1..7, got {self.case_id!r}")
        need = _REQUIRED[self.case_id]
        for name in ("lam", "lam1", "beta", "beta1", "beta2"):
            val = getattr(self, name)
            if name in need:
                if val is None:
                    raise DomainError(f"case {self.case_id} needs {name}")
                object.__setattr__(self, name, as_real(val))
            elif val is not None:
                raise DomainError(f"case {self.case_id} does not use {name}")
        if self.case_id in (3, 5, 6) and not self.rho >= 1:
            raise DomainError("this case needs rho >= 1")
        if self.case_id == 7 and not self.rho > 0:
            raise DomainError("case 7 needs rho > 0")

    def targets(self):
        """``(tau-side target, exact?)`` and ``(theta-side target, exact?)``."""
        c = self.case_id
        theta_side = {
            1: (Fraction(0), None),
            2: (self.lam, True),
            3: (self.beta, False),
            4: (self.lam1, True),
            5: (self.beta, False),
            6: (self.lam, True),
            7: (self.beta2, False),
        }[c]
        tau_side = {4: (self.lam, True), 5: (self.lam, True), 6: (self.beta, False), 7: (self.beta1, False)}.get(c)
        return tau_side, theta_side

    def shift_phase(self):
        """``(shift, phi)`` entering the theta main term of cases 4-7."""
        return {
            4: (self.lam, self.lam1),
            5: (self.lam, self.beta),
            6: (self.beta, self.lam),
            7: (self.beta1, self.beta2),
        }[self.case_id]


@dataclass(frozen=True)
class Offsets:
    """``-n tau = m + c`` (cases 4-7) and ``n theta = m1 + d``, with float offsets."""

    n: int
    m: int | None
    c: float | None
    m1: int
    d: float
    n_tau: float


def _negate(x):
    if isinstance(x, SymbolicReal):
        return SymbolicReal(f"-({x.expr})")
    return -x


def _split(x, target, n: int, exact: bool | None, rho: float, what: str) -> tuple[int, float]:
    m, r = _exact_residual(x, target, n, max(rho, 1.0))
    if exact is True:
        if isinstance(x, Fraction) and isinstance(target, Fraction):
            ok = r == 0
        else:
            ok = abs(r) <= 1e-12 * max(1.0, n)
        if not ok:
            raise HypothesisViolated(f"{what}: n={n} misses its exact target by {r:.3e}")
    elif exact is False and not abs(r) < n ** (-rho):
        raise HypothesisViolated(f"{what}: |residual| = {abs(r):.3e} >= n^-rho at n={n}")
    return m, float(target) + r


def _offsets(family: Family, spec: ScalingSpec, cp: CaseParams, n: int) -> Offsets:
    geo = _GEOMETRY[family.tag]
    if cp.case_id not in geo.cases:
        raise CaseNotStated(f"{family.describe()} has no case {cp.case_id}")
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    n = int(n)
    tau = float(spec.tau)
    if cp.case_id == 1 and not tau > 0:
        raise HypothesisViolated("case 1 needs tau > 0")
    if cp.case_id in (2, 3) and tau != 0:
        raise HypothesisViolated("cases 2 and 3 need tau = 0")
    if cp.case_id >= 4 and not geo.tau_low < tau < 0:
        raise HypothesisViolated(f"cases 4-7 need {geo.tau_low} < tau < 0 for {family.describe()}")
    tau_side, theta_side = cp.targets()
    m1, d = _split(spec.theta, as_real(theta_side[0]), n, theta_side[1], cp.rho, "n theta")
    m = c = None
    n_tau = n * tau
    if tau_side is not None:
        m, c = _split(_negate(spec.tau), tau_side[0], n, tau_side[1], cp.rho, "-n tau")
        if m < 0:
            raise HypothesisViolated(f"-n tau = m + ... needs m >= 0, got m={m}")
        n_tau = -(m + c)
    if cp.idx is not None:
        if cp.idx.n != n:
            raise HypothesisViolated(f"admissible index is for n={cp.idx.n}, not {n}")
        if m is not None and cp.idx.m is not None and cp.idx.m != m:
            raise HypothesisViolated(f"index m={cp.idx.m} disagrees with recomputed m={m}")
        if theta_side[1] is not None and cp.idx.m1 is not None and cp.idx.m1 != m1:
            raise HypothesisViolated(f"index m1={cp.idx.m1} disagrees with recomputed m1={m1}")
    return Offsets(n, m, c, m1, d, n_tau)


def _resolve_n(cp: CaseParams, n: int | None) -> int:
    if n is None:
        if cp.idx is None:
            raise DomainError("n is required when the case parameters carry no index")
        return cp.idx.n
    return int(n)


# ---------------------------------------------------------------------------
# cut-offs


def cutoffs(family, n: int, q, tau: float) -> tuple[int, int]:
    """``(j_n, k_n)``; ``k_n`` is meaningful only for ``tau < 0``."""
    fam = as_family(family)
    if int(n) != n or n < 2:
        raise DomainError("cut-offs need an integer n >= 2")
    qp = as_qparam(q)
    j = math.floor(qp.q**4 * math.log(n) / -qp.ln_q)
    tau = float(tau)
    if fam.tag in (FamilyTag.QEXP, FamilyTag.RAMANUJAN, FamilyTag.QBESSEL2):
        k = math.floor(-n * tau / 2)
    else:
        k = min(math.floor((tau + 1) * n / 2), math.floor(-tau * n / 2))
    return j, k


# ---------------------------------------------------------------------------
# normalized values


def _lp(log_a: complex, ln_q: float) -> complex:
    return log_qpoch_inf_logs(log_a, ln_q)[0]


def _log_eq(log_a: complex, ln_q: float) -> LogComplex:
    """``E_q`` at ``-exp(log_a)``, i.e. ``(exp(log_a); q)_inf``, cross-checked by its series."""
    lp, _ = log_qpoch_inf_logs(log_a, ln_q)
    prod = LogComplex.from_log(lp)
    ser = eq_series_log(log_a + 1j * PI, QParam.from_log(ln_q))
    if not prod.is_zero and not ser.value.is_zero:
        if prod.rel_diff(ser.value) > 1e-8 + 10 * ser.rel_err:
            raise InternalDisagreement("E_q product and series disagree")
    return prod


def _log_jnu_over_power(nu: float, log_p: complex, ln_q: float) -> LogComplex:
    """``J_nu^(2)(2P; q) / P^nu`` (branch free) with ``P = exp(log_p)``."""
    lp_num = _lp((nu + 1) * ln_q, ln_q)
    lp_den = _lp(ln_q, ln_q)
    ser = jnu_series_log(nu, log_p, QParam.from_log(ln_q))
    return ser.value * LogComplex.from_log(lp_num - lp_den)


def _wrap(x: complex) -> complex:
    return complex(x.real, math.remainder(x.imag, 2 * PI))


def _poly_lognorm(n: int, lz: complex, o: Offsets, ln_q: float) -> complex:
    """``log((-z)^n q^{n^2(1-s)})`` for SW and q-Laguerre, phase reduced exactly."""
    return n * (lz + 1j * PI) + n * n * ln_q - n * (2 * o.n_tau + 2 * n) * ln_q - 2j * PI * n * o.d


def normalized_actual(family, spec: ScalingSpec, cp: CaseParams, z: complex, q, n: int | None = None) -> LogComplex:
    """The left side of the case's identity, from a direct evaluation of the function."""
    fam = as_family(family)
    n = _resolve_n(cp, n)
    o = _offsets(fam, spec, cp, n)
    z = complex(z)
    if z == 0:
        raise DomainError("z must be nonzero")
    qp = as_qparam(q)
    L = qp.ln_q
    lz = cmath.log(z)
    psi = 2 * PI * o.d
    tail = cp.case_id >= 4
    lqq = _lp(L, L)
    tag = fam.tag
    if tag is FamilyTag.QEXP:
        val = _log_eq((o.n_tau + 0.5) * L + 1j * psi + lz, L)
        if tail:
            m = o.m
            val = val * LogComplex.from_log(lqq - m * (lz + 1j * psi + 1j * PI) - m * (o.n_tau + m / 2) * L)
        return val
    if tag is FamilyTag.RAMANUJAN:
        val = aq_series_log(2 * o.n_tau * L + 1j * psi + lz, qp).value
        if tail:
            m = o.m
            val = val * LogComplex.from_log(lqq - m * (lz + 1j * psi + 1j * PI) - m * (2 * o.n_tau + m) * L)
        return val
    if tag is FamilyTag.QBESSEL2:
        nu = fam.param
        log_p = _wrap((o.n_tau - nu / 2) * L + lz + 1j * PI * ((o.m1 % 2) + o.d))
        ratio = _log_jnu_over_power(nu, log_p, L)  # J(2P)/P^nu
        if cp.case_id == 1:
            return ratio * LogComplex.from_log(lqq - _lp((nu + 1) * L, L))
        if cp.case_id == 3:
            return ratio * LogComplex.from_log(lqq)
        m = o.m
        return ratio * LogComplex.from_log(2 * lqq - 1j * PI * m - 2 * m * lz - 1j * m * psi - m * (2 * o.n_tau + m) * L)
    if tag is FamilyTag.ISMAIL_MASSON:
        half = 1j * PI * ((o.m1 % 2) + o.d)  # i pi n theta modulo 2 pi i
        xi = lz - (n / 2 + o.n_tau) * L - half
        h = ismail_masson_certified(n, xi, qp).value
        lognorm = n * lz - n * (n / 2 + o.n_tau) * L - 1j * PI * ((n * o.m1) % 2) - 1j * PI * n * o.d
        if not tail:
            return h * LogComplex.from_log(-lognorm)
        m = o.m
        extra = lqq + m * (2 * lz - 1j * psi + 1j * PI) - m * (2 * o.n_tau + m) * L
        return h * LogComplex.from_log(extra - lognorm)
    # Stieltjes-Wigert and q-Laguerre share the argument and normalization
    log_x = lz - (2 * o.n_tau + 2 * n) * L - 1j * psi
    if tag is FamilyTag.STIELTJES_WIGERT:
        p = stieltjes_wigert_log(n, log_x, qp).value
    else:
        p = q_laguerre_log(n, fam.param, log_x - fam.param * L, qp).value
    lognorm = _poly_lognorm(n, lz, o, L)
    if not tail:
        return p * LogComplex.from_log(lqq - lognorm)
    m = o.m
    extra = 2 * lqq + m * (lz - 1j * psi + 1j * PI) - m * (2 * o.n_tau + m) * L
    return p * LogComplex.from_log(extra - lognorm)


def normalized_series_terms(family, spec: ScalingSpec, cp: CaseParams, z: complex, q, n: int | None = None):
    """Log-terms of the reversed sum equal to the case-1/2/3 normalized value.

    Returns ``(log_term, log_ratio_bound, finite_length)``; ``finite_length`` is
    ``None`` for the infinite series of E_q, A_q and J.
    """
    fam = as_family(family)
    n = _resolve_n(cp, n)
    o = _offsets(fam, spec, cp, n)
    z = complex(z)
    qp = as_qparam(q)
    L = qp.ln_q
    lz = cmath.log(z)
    psi = 2 * PI * o.d
    tag = fam.tag
    if tag in (FamilyTag.QEXP, FamilyTag.RAMANUJAN, FamilyTag.QBESSEL2):
        if tag is FamilyTag.QEXP:
            quad, lin = 0.5 * L, lz + o.n_tau * L + 1j * psi + 1j * PI
        elif tag is FamilyTag.RAMANUJAN:
            quad, lin = L, lz + 2 * o.n_tau * L + 1j * psi + 1j * PI
        else:
            quad, lin = L, 2 * lz + 2 * o.n_tau * L + 1j * psi + 1j * PI
        nu = fam.param if tag is FamilyTag.QBESSEL2 else None

        def lt(k):
            top = int(k.max()) + 1
            out = k * k * quad + k * lin - log_qq_table(L, top)[k]
            if nu is not None:
                out = out - log_shifted_table(L, (nu + 1) * L, top)[k]
            return out

        def ratio(k):
            r = (2 * k + 1) * quad + lin.real - math.log(-math.expm1((k + 1) * L))
            if nu is not None:
                r -= math.log(-math.expm1((k + nu + 1) * L))
            return r

        return lt, ratio, None
    lqq_n = log_qq_table(L, n + 1)
    if tag is FamilyTag.ISMAIL_MASSON:
        lin = 2 * o.n_tau * L + 1j * psi + 1j * PI - 2 * lz

        def lt(k):
            return k * k * L + k * lin + lqq_n[n] - lqq_n[k] - lqq_n[n - k]

        return lt, None, n + 1
    lin = 2 * o.n_tau * L + 1j * psi + 1j * PI - lz
    lqq = _lp(L, L).real
    alpha = fam.param if tag is FamilyTag.QLAGUERRE else None
    la = log_shifted_table(L, (alpha + 1) * L, n + 1) if alpha is not None else None

    def lt(k):
        out = k * k * L + k * lin + lqq - lqq_n[k] - lqq_n[n - k]
        if la is not None:
            out = out + la[n] - la[n - k]
        return out

    return lt, None, n + 1


def case1_residual(family, spec: ScalingSpec, cp: CaseParams, z: complex, q, n: int | None = None) -> float:
    """``|normalized - 1|`` for case 1 without cancellation: the k >= 1 terms plus ``t_0 - 1``."""
    if cp.case_id != 1:
        raise DomainError("case1_residual is for case 1 only")
    lt, ratio, length = normalized_series_terms(family, spec, cp, z, q, n)
    t0 = complex(lt(np.arange(1))[0])
    head = cmath.exp(t0.imag * 1j) * math.expm1(t0.real) + (cmath.exp(1j * t0.imag) - 1)
    if length is None:
        rest = sum_series(lambda k: lt(k + 1), lambda k: ratio(k + 1), DEFAULT_POLICY)
        tail = rest.value
    else:
        if length <= 1:
            return abs(head)
        tail = finite_sum(lt(np.arange(length))[1:]).value
    total = LogComplex.from_complex(head) + tail if head != 0 else tail
    return 0.0 if total.is_zero else math.exp(total.log_mag)


# ---------------------------------------------------------------------------
# main terms


def _theta_arg_log(fam: Family, cp: CaseParams, lz: complex, L: float) -> complex:
    geo = _GEOMETRY[fam.tag]
    shift, phi = cp.shift_phase()
    return geo.ez * lz + geo.c * float(shift) * L - 2j * PI * float(phi)


def main_term(family, spec: ScalingSpec, cp: CaseParams, z: complex, q, n: int | None = None) -> LogComplex:
    fam = as_family(family)
    if cp.case_id not in _GEOMETRY[fam.tag].cases:
        raise CaseNotStated(f"{fam.describe()} has no case {cp.case_id}")
    if cp.case_id == 1:
        return LogComplex.one()
    z = complex(z)
    if z == 0:
        raise DomainError("z must be nonzero")
    qp = as_qparam(q)
    L = qp.ln_q
    lz = cmath.log(z)
    tag = fam.tag
    if cp.case_id in (2, 3):
        target = float(cp.lam if cp.case_id == 2 else cp.beta)
        ph = 2j * PI * target
        if tag is FamilyTag.QEXP:
            return _log_eq(0.5 * L + lz + ph, L)
        if tag is FamilyTag.RAMANUJAN:
            return aq_series_log(lz + ph, qp).value
        if tag is FamilyTag.QBESSEL2:
            n = _resolve_n(cp, n)
            o = _offsets(fam, spec, cp, n)
            nu = fam.param
            log_p0 = _wrap(-nu / 2 * L + lz + 1j * PI * ((o.m1 % 2) + target))
            return _log_jnu_over_power(nu, log_p0, L) * LogComplex.from_log(_lp(L, L))
        if tag is FamilyTag.ISMAIL_MASSON:
            return aq_series_log(ph - 2 * lz, qp).value
        return aq_series_log(ph - lz, qp).value
    geo = _GEOMETRY[tag]
    return theta_sum_logs(4, geo.nome * L, _theta_arg_log(fam, cp, lz, L)).value


# ---------------------------------------------------------------------------
# bounds


def _lse(vals) -> float:
    vals = [v for v in vals if v > NEG_INF]
    if not vals:
        return NEG_INF
    top = max(vals)
    return top + math.log(math.fsum(math.exp(v - top) for v in vals))


def _log_aq_neg(x: float, qp: QParam) -> float:
    """``log A_q(-x)`` for ``x > 0`` (all terms positive)."""
    return aq_series_log(math.log(x) + 1j * PI, qp).value.log_mag


def log_error_bound(family, spec: ScalingSpec, cp: CaseParams, z: complex, q, n: int) -> float:
    """Natural log of the printed remainder bound; raises ``NotApplicable`` below its range."""
    fam = as_family(family)
    geo = _GEOMETRY[fam.tag]
    if cp.case_id not in geo.cases:
        raise CaseNotStated(f"{fam.describe()} has no case {cp.case_id}")
    n = int(n)
    if n < 2:
        raise NotApplicable("the bounds are stated for n >= 2")
    qp = as_qparam(q)
    L = qp.ln_q
    la = math.log(abs(complex(z)))
    tau = float(spec.tau)
    l1q = math.log(qp.one_minus_q)
    tag = fam.tag
    case = cp.case_id
    log_ln_n = math.log(math.log(n)) - cp.rho * math.log(n)

    if case == 1:
        if tag is FamilyTag.QEXP:
            lx = la + (n * tau + 0.5) * L - l1q
        elif tag is FamilyTag.RAMANUJAN:
            lx = la + (2 * n * tau + 1) * L - l1q
        elif tag is FamilyTag.QBESSEL2:
            lx = 2 * la + (2 * n * tau + 1) * L - l1q
        elif tag is FamilyTag.ISMAIL_MASSON:
            lx = -2 * la + (2 * tau * n + 1) * L - l1q
        else:
            lx = -la + (2 * tau * n + 1) * L - l1q
        out = lx + math.exp(lx)
        if tag is FamilyTag.QBESSEL2:
            out -= _lp((fam.param + 1) * L, L).real
        return out

    j, k = cutoffs(fam, n, qp, tau)
    if case == 2:
        p = 2 if tag is FamilyTag.ISMAIL_MASSON else 1
        const = {FamilyTag.ISMAIL_MASSON: 6, FamilyTag.STIELTJES_WIGERT: 2, FamilyTag.QLAGUERRE: 14}[tag]
        h = n // 2
        lead = math.log(const) + _log_aq_neg(math.exp(-p * la), qp) - _lp(L, L).real
        return lead + _lse([n / 2 * L, h * h * L - p * h * la])

    if case == 3:
        if tag is FamilyTag.QEXP:
            ly = la + 0.5 * L - l1q
        elif tag is FamilyTag.RAMANUJAN:
            ly = la + L - l1q
        elif tag is FamilyTag.QBESSEL2:
            ly = 2 * la + L - l1q
        elif tag is FamilyTag.ISMAIL_MASSON:
            ly = L - 2 * la - l1q
        else:
            ly = L - la - l1q
        parts = [log_ln_n, j * ly - math.lgamma(j + 1)]
        if tag in (FamilyTag.ISMAIL_MASSON, FamilyTag.STIELTJES_WIGERT, FamilyTag.QLAGUERRE):
            parts.append(n / 2 * L - l1q)
        return math.log(24) + math.exp(ly) + _lse(parts)

    # cases 4-7
    if k < 1:
        raise NotApplicable(f"k_n = {k} < 1 at n = {n}")
    shift, _ = cp.shift_phase()
    lw = geo.ez * la + geo.c * float(shift) * L  # log |theta argument|
    ln_nome = geo.nome * L
    parts = [k * L - l1q]
    if case == 4:
        parts.append(k * k * ln_nome + k * lw)
        if tag in (FamilyTag.ISMAIL_MASSON, FamilyTag.STIELTJES_WIGERT, FamilyTag.QLAGUERRE):
            parts.append(k * k * ln_nome - k * lw)
    else:
        sq = j * j - (2 * j if case in (6, 7) else 0)
        parts += [sq * ln_nome + j * lw, sq * ln_nome - j * lw, log_ln_n]
    out = math.log(geo.consts[case]) + _lse(parts)
    if not (tag is FamilyTag.QLAGUERRE and case == 7):
        out += theta_sum_logs(3, ln_nome, complex(lw, 0.0)).value.log_mag
    return out


def error_bound(family, spec: ScalingSpec, cp: CaseParams, z: complex, q, n: int) -> float:
    lb = log_error_bound(family, spec, cp, z, q, n)
    return math.exp(lb) if lb < 709 else math.inf


# ---------------------------------------------------------------------------
# multiprecision re-evaluation


def _mp_aq(x, q, dps: int):
    return _mp_eval(lambda d: _mp_series(1, lambda k: -(q ** (2 * k + 1)) * x / (1 - q ** (k + 1)), None, d), dps)


def _mp_jser(nu, log_p, q, dps: int):
    """``sum q^{k^2+k nu} (-1)^k P^{2k} / (q, q^{nu+1}; q)_k``."""

    def build(d):
        with mpmath.workdps(d):
            p2 = mpmath.exp(2 * log_p)
            return _mp_series(
                1, lambda k: -(q ** (2 * k + 1 + nu)) * p2 / ((1 - q ** (k + 1)) * (1 - q ** (k + nu + 1))), None, d
            )

    return _mp_eval(build, dps)


def _mp_theta4(ln_nome, log_w, dps: int):
    """``sum (-1)^k nome^{k^2} w^k`` summed outward from its largest term."""

    def build(d):
        with mpmath.workdps(d):
            peak = int(mpmath.nint(mpmath.re(log_w) / (-2 * ln_nome)))
            eps = mpmath.mpf(10) ** (-d - 2)

            def term(k):
                return (-1) ** (k % 2) * mpmath.exp(k * k * ln_nome + k * log_w)

            s = term(peak)
            top = abs(s)
            for step in (1, -1):
                k = peak + step
                while True:
                    t = term(k)
                    s += t
                    top = max(top, abs(t))
                    if abs(t) < eps * top and abs(k - peak) > 3:
                        break
                    k += step
            return s, top

    return _mp_eval(build, dps)


def mp_pair(family, spec: ScalingSpec, cp: CaseParams, z: complex, q, n: int, dps: int):
    """``(normalized actual, main term)`` as mpmath numbers with about ``dps`` digits.

    Used when the bound lies below what binary64 can resolve.  The data ``q``
    and ``z`` are taken as exact binary values; ``tau`` and ``theta`` keep
    their exact form.
    """
    fam = as_family(family)
    o = _offsets(fam, spec, cp, n)
    tag = fam.tag
    case = cp.case_id
    qp = as_qparam(q)
    with mpmath.workdps(dps):
        Q = mpmath.mpf(qp.q)
        L = mpmath.log(Q)
        lz = mpmath.log(mpmath.mpc(complex(z)))
        pi = mpmath.pi
        ipi = mpmath.mpc(0, 1) * pi
        d = n * _mp_real(spec.theta, dps) - o.m1
        psi = 2 * pi * d
        ntau = n * _mp_real(spec.tau, dps)
        lqq = mpmath.log(mpmath.qp(Q, Q))
        m = o.m
        tail = case >= 4

        # the actual side
        if tag is FamilyTag.QEXP:
            a = mpmath.exp((ntau + mpmath.mpf(1) / 2) * L + 1j * psi + lz)
            actual = mpmath.qp(a, Q)
            if tail:
                actual *= mpmath.exp(lqq - m * (lz + 1j * psi + ipi) - m * (ntau + mpmath.mpf(m) / 2) * L)
        elif tag is FamilyTag.RAMANUJAN:
            actual = _mp_aq(mpmath.exp(2 * ntau * L + 1j * psi + lz), Q, dps)
            if tail:
                actual *= mpmath.exp(lqq - m * (lz + 1j * psi + ipi) - m * (2 * ntau + m) * L)
        elif tag is FamilyTag.QBESSEL2:
            nu = mpmath.mpf(fam.param)
            log_p = (ntau - nu / 2) * L + lz + ipi * ((o.m1 % 2) + d)
            ser = _mp_jser(nu, log_p, Q, dps)
            qa = mpmath.qp(Q ** (nu + 1), Q)
            if case == 1:
                actual = ser
            elif case == 3:
                actual = ser * qa
            else:
                actual = ser * qa * mpmath.exp(lqq - ipi * m - 2 * m * lz - 1j * m * psi - m * (2 * ntau + m) * L)
        elif tag is FamilyTag.ISMAIL_MASSON:
            xi = lz - (mpmath.mpf(n) / 2 + ntau) * L - ipi * ((o.m1 % 2) + d)

            def build(dd):
                with mpmath.workdps(dd):
                    e2 = mpmath.exp(-2 * xi)
                    return _mp_series(
                        mpmath.exp(n * xi),
                        lambda k: -(1 - Q ** (n - k)) / (1 - Q ** (k + 1)) * Q ** (2 * k + 1 - n) * e2,
                        n,
                        dd,
                    )

            h = _mp_eval(build, dps)
            lognorm = n * lz - n * (mpmath.mpf(n) / 2 + ntau) * L - ipi * ((n * o.m1) % 2) - ipi * n * d
            extra = lqq + m * (2 * lz - 1j * psi + ipi) - m * (2 * ntau + m) * L if tail else 0
            actual = h * mpmath.exp(extra - lognorm)
        else:
            log_x = lz - (2 * ntau + 2 * n) * L - 1j * psi
            if tag is FamilyTag.STIELTJES_WIGERT:
                alpha = mpmath.mpf(0)
                y = mpmath.exp(log_x)
            else:
                alpha = mpmath.mpf(fam.param)
                y = mpmath.exp(log_x - alpha * L)
            qa = Q ** (alpha + 1)

            sw = tag is FamilyTag.STIELTJES_WIGERT

            def build(dd):
                with mpmath.workdps(dd):
                    if sw:
                        t0 = 1 / mpmath.qp(Q, Q, n)
                        rat = lambda k: -(Q ** (2 * k + 1)) * y * (1 - Q ** (n - k)) / (1 - Q ** (k + 1))  # noqa: E731
                    else:
                        t0 = mpmath.qp(qa, Q, n) / mpmath.qp(Q, Q, n)
                        rat = lambda k: (  # noqa: E731
                            -(Q ** (2 * k + 1 + alpha)) * y * (1 - Q ** (n - k)) / ((1 - Q ** (k + 1)) * (1 - qa * Q**k))
                        )
                    return _mp_series(t0, rat, n, dd)

            poly = _mp_eval(build, dps)
            lognorm = n * (lz + ipi) + n * n * L - n * (2 * ntau + 2 * n) * L - 2 * ipi * n * d
            extra = 2 * lqq + m * (lz - 1j * psi + ipi) - m * (2 * ntau + m) * L if tail else lqq
            actual = poly * mpmath.exp(extra - lognorm)

        # the main term
        if case == 1:
            main = mpmath.mpf(1)
        elif case in (2, 3):
            ph = 2 * ipi * _mp_real(cp.lam if case == 2 else cp.beta, dps)
            if tag is FamilyTag.QEXP:
                main = mpmath.qp(mpmath.exp(L / 2 + lz + ph), Q)
            elif tag is FamilyTag.RAMANUJAN:
                main = _mp_aq(mpmath.exp(lz + ph), Q, dps)
            elif tag is FamilyTag.QBESSEL2:
                nu = mpmath.mpf(fam.param)
                log_p0 = -nu / 2 * L + lz + ipi * (o.m1 % 2) + ph / 2
                main = _mp_jser(nu, log_p0, Q, dps) * mpmath.qp(Q ** (nu + 1), Q)
            elif tag is FamilyTag.ISMAIL_MASSON:
                main = _mp_aq(mpmath.exp(ph - 2 * lz), Q, dps)
            else:
                main = _mp_aq(mpmath.exp(ph - lz), Q, dps)
        else:
            geo = _GEOMETRY[tag]
            shift, phi = cp.shift_phase()
            log_w = geo.ez * lz + geo.c * _mp_real(shift, dps) * L - 2 * ipi * _mp_real(phi, dps)
            main = _mp_theta4(mpmath.mpf(geo.nome) * L, log_w, dps)
        return actual, main


# below this the binary64 residual of cases 2-7 is not trusted
FLOAT_FLOOR = 1e-9


# ---------------------------------------------------------------------------
# verification


class Status(str, Enum):
    SATISFIED = "satisfied"
    NOT_YET_ASYMPTOTIC = "not_yet_asymptotic"
    VIOLATED = "violated"


# an unmet bound still this large is read as "n not yet large enough"
NOT_YET_THRESHOLD = 0.5


@dataclass(frozen=True)
class BoundReport:
    n: int
    normalized_actual: LogComplex
    main_term: LogComplex
    bound: float
    residual: float
    satisfied: bool | None
    status: Status
    remainder_label: int
    precision: str = "float"

    @property
    def hard_failure(self) -> bool:
        return self.status is Status.VIOLATED


def verify_case(family, spec: ScalingSpec, cp: CaseParams, z: complex, q, n: int | None = None) -> BoundReport:
    fam = as_family(family)
    n = _resolve_n(cp, n)
    actual = normalized_actual(fam, spec, cp, z, q, n)
    main = main_term(fam, spec, cp, z, q, n)
    if cp.case_id == 1:
        residual = case1_residual(fam, spec, cp, z, q, n)
    else:
        residual = abs_diff(actual, main)
    label = REMAINDER_LABEL[cp.case_id]
    try:
        bound = error_bound(fam, spec, cp, z, q, n)
    except NotApplicable:
        # below the range where the bound is stated: n is not large enough yet
        return BoundReport(n, actual, main, math.nan, residual, None, Status.NOT_YET_ASYMPTOTIC, label)
    precision = "float"
    # case 1 residuals are computed without cancellation, but the bound can be
    # sharp to the last digit; near-ties are settled at higher precision
    near_tie = cp.case_id == 1 and residual > bound * (1 - 1e-9)
    if near_tie or (cp.case_id != 1 and (bound < FLOAT_FLOOR or residual < FLOAT_FLOOR)):
        # resolve both sides well below the bound
        digits = 30 + max(0, int(-math.log10(max(min(bound, residual), 1e-300))))
        a_mp, m_mp = mp_pair(fam, spec, cp, z, q, n, digits)
        with mpmath.workdps(digits):
            residual = float(abs(a_mp - m_mp))
        precision = "mp"
    if residual <= bound:
        status = Status.SATISFIED
    elif bound > NOT_YET_THRESHOLD:
        status = Status.NOT_YET_ASYMPTOTIC
    else:
        status = Status.VIOLATED
    return BoundReport(n, actual, main, bound, residual, residual <= bound, status, label, precision)


def _verify_one(args):
    family, spec, cp, z, q, n = args
    return verify_case(family, spec, cp, z, q, n)


def verify_sweep(family, spec: ScalingSpec, cases, z: complex, q, jobs: int = 1) -> list[BoundReport]:
    """``verify_case`` over several ``(n, CaseParams)`` pairs; output sorted by ``n``."""
    work = [(as_family(family), spec, cp, complex(z), q, int(n)) for n, cp in cases]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_verify_one, work))
    else:
        out = [_verify_one(w) for w in work]
    return sorted(out, key=lambda r: r.n)


def bound_applicable(family, case: int, n: int, q, tau) -> bool:
    """Whether the printed bound is stated at ``n``: ``n >= 2`` and, for cases 4-7, ``k_n >= 1``."""
    if n < 2:
        return False
    if case >= 4:
        return cutoffs(family, n, q, float(tau))[1] >= 1
    return True


def admissible_cases(
    family, spec: ScalingSpec, case: int, q, count: int = 5, n_max: int = 10**5, rho: float = 1.0, **targets
) -> list[tuple[int, CaseParams]]:
    """The first ``count`` indices obeying the case hypothesis at which the bound is stated.

    Case 4 walks the CRT progression, the approximate cases scan up to
    ``n_max``.  Missing targets (``lam``, ``lam1``, ``beta``, ...) default to 0.
    """
    fam = as_family(family)
    need = _REQUIRED.get(case)
    if need is None:
        raise DomainError(f"case must be 1..7, got {case!r}")
    kw = {k: as_real(targets.get(k, Fraction(0))) for k in need}
    extra = set(targets) - set(need)
    if extra:
        raise DomainError(f"case {case} does not use {sorted(extra)}")
    tau, th = spec.tau, spec.theta

    def ok(n: int) -> bool:
        return bound_applicable(fam, case, n, q, tau)

    if case == 1:
        return [(n, CaseParams(1)) for n in range(2, 2 + count)]
    out: list[tuple[int, CaseParams]] = []
    if case == 4:
        prog = diophantine.crt_joint_rational(tau, th, kw["lam"], kw["lam1"])
        cp = CaseParams(4, **kw)
        for k in range(10 * count + 100):
            if len(out) >= count:
                break
            n = prog.n0 + k * prog.L
            if ok(n):
                out.append((n, cp))
        return out
    if case == 2:
        cp = CaseParams(2, rho=rho, **kw)
        hits = (
            (i, None)
            for i in diophantine.scan_admissible(th, kw["lam"], rho, n_max)
            if i.b_n == 0 or isinstance(th, float)
        )
    elif case == 3:
        hits = ((i, CaseParams(3, rho=rho, idx=i, **kw)) for i in diophantine.scan_admissible(th, kw["beta"], rho, n_max))
    elif case in (5, 6):
        # case 5: exact tau side, approximate theta side; case 6 swaps them
        cp = CaseParams(case, rho=rho, **kw)
        if case == 5:
            scan = diophantine.scan_admissible(th, kw["beta"], rho, n_max)
            exact_x, exact_t = _negate(tau), kw["lam"]
        else:
            scan = diophantine.scan_admissible(_negate(tau), kw["beta"], rho, n_max)
            exact_x, exact_t = th, kw["lam"]
        hits = ((i, None) for i in scan if abs(_exact_residual(exact_x, exact_t, i.n, rho)[1]) <= 1e-12 * i.n)
    else:
        scan = diophantine.scan_joint(tau, th, kw["beta1"], kw["beta2"], rho, n_max)
        hits = ((i, CaseParams(7, rho=rho, idx=i, **kw)) for i in scan)
    for idx, own in hits:
        if ok(idx.n):
            out.append((idx.n, own if own is not None else cp))
        if len(out) >= count:
            break
    return out


# ---------------------------------------------------------------------------
# q -> 1 regimes


def _kappa(fam: Family) -> int:
    return 2 if fam.tag is FamilyTag.QEXP else 1


def regime_q(family, regime: Regime, n: int) -> QParam:
    """``q = exp(-kappa pi / H)`` with ``H = n^a`` or ``gamma log n``; ``kappa = 2`` for E_q only."""
    fam = as_family(family)
    if regime.kind == "fixed":
        return QParam(regime.value)
    if regime.kind == "power" and not 0 < regime.a < 0.5:
        raise DomainError("the corollaries need 0 < a < 1/2")
    h = regime.scale(n)
    return QParam.from_log(-_kappa(fam) * PI / h)


def theta_main_regime(idx: int, regime: Regime, n: int, u: float, lam: float) -> LogComplex:
    """``theta_idx(i(u + lam/H) | i/H)`` through its modular image at ``iH``.

    Both sides are evaluated; they must agree to 1e-10 relative.
    """
    if idx not in (3, 4):
        raise DomainError("only theta_3 and theta_4 appear in the corollaries")
    h = regime.scale(n)
    y = u + lam / h
    direct = theta_sum_logs(idx, -PI / h, complex(-2 * PI * y, 0.0)).value
    partner = 3 if idx == 3 else 2
    image = theta_sum_logs(partner, -PI * h, complex(0.0, 2 * PI * (h * u + lam))).value
    transformed = image * LogComplex.from_log(0.5 * math.log(h) + PI * h * y * y)
    if direct.is_zero and transformed.is_zero:
        return transformed
    if direct.rel_diff(transformed) > 1e-10:
        raise InternalDisagreement(f"modular step differs by {direct.rel_diff(transformed):.3e}")
    return transformed


@dataclass(frozen=True)
class CorollaryRow:
    n: int
    actual: LogComplex
    predicted: LogComplex
    ratio: float


def _mp_series(t0, ratio_fn, kmax: int | None, dps: int):
    """Sum of ``t_k`` from ``t_0`` and ``t_{k+1}/t_k``; returns (sum, max |t_k|)."""
    with mpmath.workdps(dps):
        t = mpmath.mpc(t0)
        s, top = t, abs(t)
        k = 0
        eps = mpmath.mpf(10) ** (-dps - 2)
        while True:
            if kmax is not None and k >= kmax:
                break
            r = ratio_fn(k)
            t = t * r
            k += 1
            s += t
            a = abs(t)
            if a > top:
                top = a
            if kmax is None and abs(r) < 1 and a < eps * top and k > 4:
                break
        return s, top


def _mp_eval(builder, base_dps: int):
    """Run ``builder(dps)`` with enough extra digits to absorb the cancellation.

    The estimate of lost digits is itself capped by the working precision, so
    it is refined until the margin exceeds it.
    """
    dps = base_dps
    while True:
        s, top = builder(dps)
        with mpmath.workdps(dps):
            lost = dps if s == 0 else max(0, int(mpmath.log10(top / abs(s))) + 1)
        if dps - base_dps >= lost + 10:
            return s
        dps = base_dps + lost + 20


_CORS = {
    (FamilyTag.QEXP, 1),
    (FamilyTag.QEXP, 2),
    (FamilyTag.RAMANUJAN, 1),
    (FamilyTag.RAMANUJAN, 2),
    (FamilyTag.ISMAIL_MASSON, 1),
    (FamilyTag.ISMAIL_MASSON, 2),
    (FamilyTag.QLAGUERRE, 1),
    (FamilyTag.QLAGUERRE, 2),
}


def implemented_corollaries() -> list[tuple[str, int]]:
    return sorted((t.value, c) for t, c in _CORS)


def _mp_real(x, dps: int):
    """Exact inputs stay exact: fractions and symbolic reals are evaluated at ``dps``."""
    x = as_real(x)
    with mpmath.workdps(dps):
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        if isinstance(x, SymbolicReal):
            return x.mp(dps)
        return mpmath.mpf(x)


def _corollary_point(fam: Family, case: int, u: float, regime: Regime, n: int, tau, lam):
    """``(actual, prefactor, brace main, rate)`` as mpmath numbers."""
    h_f = regime.scale(n)
    tau_f = float(tau)
    m = None
    if case == 2:
        if tau_f >= 0:
            raise HypothesisViolated("corollary case 2 needs tau < 0")
        m, _ = _split(_negate(as_real(tau)), as_real(lam), n, True, 1.0, "-n tau")
        if m < 0:
            raise HypothesisViolated("m must be non-negative")
    elif not tau_f > 0:
        raise HypothesisViolated("corollary case 1 needs tau > 0")
    tag = fam.tag
    if tag is FamilyTag.ISMAIL_MASSON and case == 2 and not -0.5 < tau_f < 0:
        raise HypothesisViolated("needs -1/2 < tau < 0")
    if tag is FamilyTag.QLAGUERRE and case == 2 and not -1 < tau_f < 0:
        raise HypothesisViolated("needs -1 < tau < 0")
    if regime.kind == "power":
        rate1 = n**regime.a * regime.gamma * math.exp(-2 * PI * tau_f * n / h_f) if case == 1 else None
    else:
        rate1 = math.log(n) * math.exp(-2 * PI * tau_f * n / h_f) if case == 1 else None

    if case == 1:
        rate = {
            FamilyTag.QEXP: rate1,
            FamilyTag.RAMANUJAN: rate1,
            FamilyTag.ISMAIL_MASSON: math.exp(-4 * PI * h_f)
            if regime.kind == "power"
            else math.exp(-2 * PI * tau_f * n / h_f),
            FamilyTag.QLAGUERRE: math.exp(-4 * PI * h_f),
        }[tag]
    else:
        rate = math.exp(-2 * PI * h_f)
    base = hp.dps_for(rate, extra=30)

    def build(dps):
        with mpmath.workdps(dps):
            H = mpmath.mpf(regime.gamma) * (mpmath.mpf(n) ** regime.a if regime.kind == "power" else mpmath.log(n))
            U = mpmath.mpf(u)
            T = _mp_real(tau, dps)
            q = mpmath.exp(-_kappa(fam) * mpmath.pi / H)
            if tag is FamilyTag.QEXP:
                x = -mpmath.exp(2 * mpmath.pi * (U - (n * T + mpmath.mpf(1) / 2) / H))
                return _mp_series(1, lambda k: q**k * x / (1 - q ** (k + 1)), None, dps)
            if tag is FamilyTag.RAMANUJAN:
                x = mpmath.exp(2 * mpmath.pi * (U - n * T / H))
                return _mp_series(1, lambda k: -(q ** (2 * k + 1)) * x / (1 - q ** (k + 1)), None, dps)
            if tag is FamilyTag.ISMAIL_MASSON:
                xi = mpmath.pi * (U + (T + mpmath.mpf(1) / 2) * n / H)
                e2 = mpmath.exp(-2 * xi)
                return _mp_series(
                    mpmath.exp(n * xi),
                    lambda k: -(1 - q ** (n - k)) / (1 - q ** (k + 1)) * q ** (2 * k + 1 - n) * e2,
                    n,
                    dps,
                )
            alpha = mpmath.mpf(fam.param)
            x = mpmath.exp(2 * mpmath.pi * (U + (T + 1) * n / H + alpha / (2 * H)))
            qa = q ** (alpha + 1)
            t0 = mpmath.qp(qa, q, n) / mpmath.qp(q, q, n)
            return _mp_series(
                t0,
                lambda k: -(q ** (2 * k + 1 + alpha)) * x * (1 - q ** (n - k)) / ((1 - q ** (k + 1)) * (1 - qa * q**k)),
                n,
                dps,
            )

    actual = _mp_eval(build, base)
    with mpmath.workdps(base):
        H = mpmath.mpf(regime.gamma) * (mpmath.mpf(n) ** regime.a if regime.kind == "power" else mpmath.log(n))
        U, T, pi = mpmath.mpf(u), _mp_real(tau, base), mpmath.pi
        lam_f = _mp_real(lam, base) if lam is not None else 0
        sign = (-1) ** m if m is not None else 1
        brace = mpmath.mpf(1)
        if tag is FamilyTag.QEXP:
            if case == 1:
                pref = mpmath.mpf(1)
            else:
                pref = sign * 2 * mpmath.exp(pi * (H * U - n * T) ** 2 / H - pi * H / 6 - pi / (12 * H))
                brace = mpmath.cos(pi * (H * U + lam_f))
        elif tag is FamilyTag.RAMANUJAN:
            if case == 1:
                pref = mpmath.mpf(1)
            else:
                pref = sign * mpmath.sqrt(2) * mpmath.exp(pi * (H * U - n * T) ** 2 / H - pi / (24 * H) - pi * H / 12)
                brace = mpmath.cos(pi * (H * U + lam_f))
        elif tag is FamilyTag.ISMAIL_MASSON:
            if case == 1:
                pref = mpmath.exp(n * pi * U + (T + mpmath.mpf(1) / 2) * pi * n * n / H)
            else:
                ex = pi * (H * U + (T + mpmath.mpf(1) / 2) * n) ** 2 / H + pi * n * n / (4 * H) - pi * H / 12 - pi / (24 * H)
                pref = sign * mpmath.sqrt(2) * mpmath.exp(ex)
                brace = mpmath.cos(pi * (H * U - lam_f))
        else:
            if case == 1:
                ex = 2 * n * pi * U + (2 * T + 1) * pi * n * n / H + pi * H / 6 - pi / (24 * H)
                pref = (-1) ** n * mpmath.exp(ex) / mpmath.sqrt(2 * H)
            else:
                ex = pi * (H * U + (T + 1) * n) ** 2 / H + pi * H / 12 - pi / (12 * H)
                pref = (-1) ** (n - m) * mpmath.exp(ex) / mpmath.sqrt(H)
                brace = mpmath.cos(pi * (H * U - lam_f))
    return actual, pref, brace, rate, base


def _corollary_row(args) -> CorollaryRow:
    fam, case, u, regime, n, tau, lam = args
    actual, pref, brace, rate, dps = _corollary_point(fam, case, u, regime, n, tau, lam)
    with mpmath.workdps(dps):
        predicted = pref * brace
        ratio = float(abs(actual - predicted) / (abs(pref) * rate))
        return CorollaryRow(n, hp.to_logcomplex(actual), hp.to_logcomplex(predicted), ratio)


def corollary_check(
    family, corollary_case: int, u: float, regime: Regime, n_list, tau, lam=None, jobs: int = 1
) -> list[CorollaryRow]:
    """Compare direct evaluations with a corollary's closed form along ``n_list``.

    ``ratio`` is ``|actual - predicted| / (|prefactor| * rate)``: the error
    measured in units of the printed O-rate, relative to the factor in front
    of the braces.
    """
    fam = as_family(family)
    if (fam.tag, corollary_case) not in _CORS:
        raise CaseNotStated(f"no corollary case {corollary_case} implemented for {fam.describe()}")
    if regime.kind == "fixed":
        raise DomainError("corollaries need a power or log regime")
    if regime.kind == "power" and not 0 < regime.a < 0.5:
        raise DomainError("the corollaries need 0 < a < 1/2")
    if corollary_case == 2 and lam is None:
        raise DomainError("corollary case 2 needs lam")
    work = []
    for n in n_list:
        regime.check_n(int(n))
        work.append((fam, corollary_case, float(u), regime, int(n), as_real(tau), None if lam is None else as_real(lam)))
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_corollary_row, work))
    else:
        rows = [_corollary_row(w) for w in work]
    return sorted(rows, key=lambda r: r.n)


def fitted_constant(rows: list[CorollaryRow]) -> float:
    return max(r.ratio for r in rows)
