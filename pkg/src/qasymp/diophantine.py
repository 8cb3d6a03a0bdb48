"""Admissible index sequences: integers n with n*theta and -n*tau close to prescribed residues.

Real parameters may be given as floats, exact rationals (``Fraction`` or
:class:`RationalNumber`), or symbolic strings such as ``"sqrt(2)"`` or
``"1 - sqrt(2)"`` that are evaluated in extended precision on demand.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath
import numpy as np

from .errors import DomainError, NoSolution, NotFound

# beyond this accuracy exponent binary64 products n*theta are not trustworthy
FLOAT_RHO_LIMIT = 12.0


@dataclass(frozen=True)
class RationalNumber:
    """A reduced fraction ``p/q`` with ``q >= 1``."""

    p: int
    q: int

    def __post_init__(self) -> None:
        if self.q == 0:
            raise DomainError("denominator must be non-zero")
        f = Fraction(int(self.p), int(self.q))
        object.__setattr__(self, "p", f.numerator)
        object.__setattr__(self, "q", f.denominator)

    @classmethod
    def of(cls, x) -> RationalNumber:
        f = as_fraction(x)
        return cls(f.numerator, f.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        return self.p / self.q

    def __str__(self) -> str:
        return f"{self.p}/{self.q}" if self.q != 1 else str(self.p)


# ---------------------------------------------------------------------------
# symbolic reals


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": lambda: mpmath.pi, "e": lambda: mpmath.e, "golden": lambda: mpmath.phi, "phi": lambda: mpmath.phi}
_TAGS = {"sqrt2": "sqrt(2)", "sqrt3": "sqrt(3)", "sqrt5": "sqrt(5)"}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return mpmath.mpf(node.value) if isinstance(node.value, int) else mpmath.mpf(repr(node.value))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]()
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id == "sqrt"
        and len(node.args) == 1
    ):
        return mpmath.sqrt(_eval_node(node.args[0]))
    raise DomainError(f"unsupported symbolic expression element: {ast.dump(node)}")


@dataclass(frozen=True)
class SymbolicReal:
    """A real number given by an arithmetic expression in ``sqrt``, ``pi``, ``e``, ``golden``."""

    expr: str

    def __post_init__(self) -> None:
        text = _TAGS.get(self.expr.strip(), self.expr.strip())
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise DomainError(f"cannot parse {self.expr!r}") from exc
        object.__setattr__(self, "_tree", tree)
        self.mp(30)  # validates the expression

    def mp(self, dps: int):
        with mpmath.workdps(dps):
            return +_eval_node(self._tree)  # type: ignore[attr-defined]

    def __float__(self) -> float:
        return float(self.mp(30))


RealLike = Union[float, int, Fraction, RationalNumber, SymbolicReal, str]


def as_real(x: RealLike):
    """Normalise user input: strings become fractions when possible, else symbolic."""
    if isinstance(x, (SymbolicReal, RationalNumber, Fraction)):
        return x.fraction if isinstance(x, RationalNumber) else x
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            return SymbolicReal(x)
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


def as_fraction(x) -> Fraction:
    """Exact rational value; floats are accepted only if they are short decimals or dyadic."""
    if isinstance(x, RationalNumber):
        return x.fraction
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise DomainError(f"{x!r} is not a rational number") from exc
    if isinstance(x, float):
        f = Fraction(x).limit_denominator(10**6)
        if float(f) == x:
            return f
        raise DomainError(f"float {x!r} has no short rational representation; pass a Fraction")
    raise DomainError(f"{x!r} is not a rational number")


def _mp_value(x, dps: int):
    with mpmath.workdps(dps):
        if isinstance(x, SymbolicReal):
            return x.mp(dps)
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        return mpmath.mpf(x)


# ---------------------------------------------------------------------------
# admissible indices


@dataclass(frozen=True)
class AdmissibleIndex:
    """An index ``n`` with ``-n tau = m + lambda + a_n`` and ``n theta = m1 + beta + b_n``.

    Components that a scan does not constrain are ``None``.
    """

    n: int
    m: int | None = None
    m1: int | None = None
    a_n: float | None = None
    b_n: float | None = None
    rho: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.m is not None and self.m < 0:
            raise DomainError("m must be non-negative")

    def verify(self) -> bool:
        """Re-check the stated residual inequalities (strict, as in the definition)."""
        tol = self.n ** (-self.rho)
        ok = self.m is None or self.m >= 0
        if self.a_n is not None:
            ok = ok and abs(self.a_n) < tol
        if self.b_n is not None:
            ok = ok and abs(self.b_n) < tol
        return ok


def continued_fraction(theta: RealLike, depth: int) -> list[Fraction]:
    """The first ``depth`` convergents of ``theta``; stops early for rationals."""
    if depth < 1:
        raise DomainError("depth must be at least 1")
    x = as_real(theta)
    if isinstance(x, Fraction):
        partial = _cf_exact(x, depth)
    elif isinstance(x, SymbolicReal):
        partial = _cf_mp(x.mp(40 + 3 * depth), depth, 40 + 3 * depth)
    else:
        partial = _cf_float(float(x), depth)
    out: list[Fraction] = []
    h0, h1, k0, k1 = 1, partial[0], 0, 1
    out.append(Fraction(h1, k1))
    for a in partial[1:]:
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append(Fraction(h1, k1))
    return out


def _cf_exact(x: Fraction, depth: int) -> list[int]:
    terms = []
    while len(terms) < depth:
        a = math.floor(x)
        terms.append(a)
        rem = x - a
        if rem == 0:
            break
        x = 1 / rem
    return terms


def _cf_float(x: float, depth: int) -> list[int]:
    # a float carries ~16 digits; stop once the remainder is at rounding level
    terms = []
    scale = max(1.0, abs(x))
    denom_prod = 1.0
    while len(terms) < depth:
        a = math.floor(x)
        terms.append(a)
        rem = x - a
        denom_prod *= max(1.0, abs(x))
        if rem < 1e-12 * scale * denom_prod:
            break
        x = 1.0 / rem
    return terms


def _cf_mp(x, depth: int, dps: int) -> list[int]:
    terms = []
    with mpmath.workdps(dps):
        tiny = mpmath.mpf(10) ** (-(dps - 10))
        while len(terms) < depth:
            a = int(mpmath.floor(x))
            terms.append(a)
            rem = x - a
            if rem < tiny:
                break
            x = 1 / rem
    return terms


def _residuals(theta, beta, n: np.ndarray, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Nearest integers ``m`` and signed residuals ``n theta - beta - m`` for each ``n``.

    Candidates near the threshold are recomputed exactly (rational input) or in
    extended precision (symbolic input) so that the strict inequality is decided
    on the true value of the inputs.
    """
    th = as_real(theta)
    be = as_real(beta)
    if rho > FLOAT_RHO_LIMIT and not (
        isinstance(th, (Fraction, SymbolicReal)) and isinstance(be, (Fraction, SymbolicReal))
    ):
        raise DomainError(f"rho > {FLOAT_RHO_LIMIT} requires exact or symbolic theta and beta")
    x = n * float(th) - float(be)
    m = np.rint(x)
    r = x - m
    tol = n.astype(float) ** (-rho)
    suspect = np.abs(np.abs(r) - tol) < 1e-9 + 4e-16 * np.abs(x)
    suspect |= np.abs(r) < tol  # always confirm accepted ones
    for i in np.nonzero(suspect)[0]:
        mi, ri = _exact_residual(th, be, int(n[i]), rho)
        m[i], r[i] = mi, ri
    return m.astype(np.int64), r


def _exact_residual(th, be, n: int, rho: float) -> tuple[int, float]:
    if isinstance(th, float):
        th = Fraction(th)
    if isinstance(be, float):
        be = Fraction(be)
    if isinstance(th, Fraction) and isinstance(be, Fraction):
        x = n * th - be
        m = round(x)
        return int(m), float(x - m)
    dps = 30 + int(rho * math.log10(max(n, 2))) + int(math.log10(max(n, 2)))
    with mpmath.workdps(dps):
        x = n * _mp_value(th, dps) - _mp_value(be, dps)
        m = int(mpmath.nint(x))
        return m, float(x - m)


def chebyshev_witness(theta: RealLike, beta: RealLike, n_max: int) -> AdmissibleIndex:
    """Smallest ``n <= n_max`` with ``|n theta - beta - m| <= 3/n`` for some integer ``m``."""
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    n = np.arange(1, n_max + 1)
    m, r = _residuals(theta, beta, n, 1.0)
    hit = np.nonzero(np.abs(r) <= 3.0 / n)[0]
    if hit.size == 0:
        raise NotFound(f"no witness up to n={n_max}")
    i = int(hit[0])
    return AdmissibleIndex(n=int(n[i]), m1=int(m[i]), b_n=float(r[i]), rho=1.0)


def scan_admissible(theta: RealLike, beta: RealLike, rho: float, n_max: int) -> list[AdmissibleIndex]:
    """All ``n <= n_max`` with ``|n theta - beta - m1| < n^{-rho}``."""
    if rho < 0:
        raise DomainError("rho must be non-negative")
    if n_max < 1:
        return []
    n = np.arange(1, n_max + 1)
    m, r = _residuals(theta, beta, n, rho)
    hit = np.nonzero(np.abs(r) < n.astype(float) ** (-rho))[0]
    return [AdmissibleIndex(n=int(n[i]), m1=int(m[i]), b_n=float(r[i]), rho=rho) for i in hit]


def scan_joint(
    tau: RealLike, theta: RealLike, beta1: RealLike, beta2: RealLike, rho: float, n_max: int
) -> list[AdmissibleIndex]:
    """All ``n <= n_max`` with ``-n tau = m + beta1 + a_n`` (``m >= 0``) and
    ``n theta = m1 + beta2 + b_n``, both residuals below ``n^{-rho}``."""
    t = as_real(tau)
    if not float(t) < 0:
        raise DomainError("scan_joint needs tau < 0")
    if not rho > 0:
        raise DomainError("rho must be positive")
    if n_max < 1:
        return []
    neg_tau = -t if not isinstance(t, SymbolicReal) else SymbolicReal(f"-({t.expr})")
    n = np.arange(1, n_max + 1)
    tol = n.astype(float) ** (-rho)
    m, a = _residuals(neg_tau, beta1, n, rho)
    m1, b = _residuals(theta, beta2, n, rho)
    hit = np.nonzero((np.abs(a) < tol) & (np.abs(b) < tol) & (m >= 0))[0]
    return [
        AdmissibleIndex(n=int(n[i]), m=int(m[i]), m1=int(m1[i]), a_n=float(a[i]), b_n=float(b[i]), rho=rho)
        for i in hit
    ]


def sset_rational(theta) -> set[Fraction]:
    """``{ {n theta} : n >= 0 }`` for rational ``theta``: the multiples of ``1/q`` it reaches."""
    f = as_fraction(theta)
    p, q = f.numerator, f.denominator
    return {Fraction((k * p) % q, q) for k in range(q)}


@dataclass(frozen=True)
class Progression:
    """The arithmetic progression ``n0 + k L`` for ``k >= 0``."""

    n0: int
    L: int

    def take(self, count: int) -> list[int]:
        return [self.n0 + k * self.L for k in range(count)]

    def __contains__(self, n: int) -> bool:
        return n >= self.n0 and (n - self.n0) % self.L == 0


def _solve_linear(a: int, r: Fraction, mod_from: Fraction) -> tuple[int, int]:
    """Solve ``n * a/b == r (mod 1)`` for ``n``; returns ``(residue, modulus)``."""
    b = mod_from.denominator
    a_num = mod_from.numerator
    if (r * b).denominator != 1:
        raise NoSolution(f"target {r} is not in S({mod_from})")
    target = int(r * b) % b
    g = math.gcd(a_num, b)
    if target % g:
        raise NoSolution(f"target {r} is not in S({mod_from})")
    b2 = b // g
    inv = pow((a_num // g) % b2, -1, b2) if b2 > 1 else 0
    return ((target // g) * inv) % b2 if b2 > 1 else 0, b2


def crt_joint_rational(tau, theta, lam, lam1) -> Progression:
    """Progression of ``n`` with ``-n tau = m + lam`` (``m >= 0``) and ``n theta = m1 + lam1`` exactly."""
    neg_tau = -as_fraction(tau)
    if not neg_tau > 0:
        raise DomainError("crt_joint_rational needs tau < 0")
    th = as_fraction(theta)
    lam_f, lam1_f = as_fraction(lam), as_fraction(lam1)
    r1, m1 = _solve_linear(neg_tau.numerator, lam_f - math.floor(lam_f), neg_tau)
    r2, m2 = _solve_linear(th.numerator, lam1_f - math.floor(lam1_f), th)
    g = math.gcd(m1, m2)
    if (r1 - r2) % g:
        raise NoSolution("congruences for tau and theta are incompatible")
    L = m1 // g * m2
    # combine n = r1 (mod m1), n = r2 (mod m2)
    if m1 == 1:
        n0 = r2 % m2
    else:
        k = ((r2 - r1) // g) * pow((m1 // g) % (m2 // g), -1, m2 // g) if m2 // g > 1 else 0
        n0 = (r1 + m1 * k) % L
    if n0 == 0:
        n0 = L
    # m = n(-tau) - lam must be a non-negative integer
    while n0 * neg_tau - lam_f < 0:
        n0 += L
    return Progression(n0, L)
