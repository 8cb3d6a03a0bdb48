import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qasymp.core import (
    LogComplex,
    QParam,
    lemma1_bounds,
    log_qpoch_inf_logs,
    qgamma,
    qpoch_finite,
    qpoch_infinite,
    qpoch_infinite_certified,
    wrap_phase,
)
from qasymp.errors import DomainError, HypothesisViolated, PoleError


def mp_qpoch(a, q, n=None, dps=40):
    # independent oracle: direct product at high precision
    with mpmath.workdps(dps):
        a, q = mpmath.mpmathify(a), mpmath.mpf(q)
        if n is not None:
            return complex(mpmath.fprod(1 - a * q**k for k in range(n)))
        return complex(mpmath.qp(a, q))


def close(v: LogComplex, ref: complex, rel=1e-12):
    return abs(v.to_complex() - ref) <= rel * max(1.0, abs(ref))


moduli = st.floats(0.05, 0.95)
args = st.complex_numbers(max_magnitude=4.0, allow_nan=False, allow_infinity=False)


class TestLogComplex:
    def test_zero_encoding(self):
        z = LogComplex.zero()
        assert z.is_zero and z.phase == 0.0
        assert (z * LogComplex(3.0, 1.0)).is_zero

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            LogComplex(float("nan"))

    def test_huge_magnitudes_do_not_overflow(self):
        a = LogComplex(5000.0, 0.3)
        b = LogComplex(-4990.0, -0.1)
        assert math.isclose((a * b).log_mag, 10.0)
        assert math.isclose((a / b).log_mag, 9990.0)

    @given(st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e6, allow_nan=False, allow_infinity=False))
    def test_roundtrip(self, z):
        assert cmath.isclose(LogComplex.from_complex(z).to_complex(), z, rel_tol=1e-13)

    @given(st.floats(-50, 50))
    def test_wrap_phase_range(self, p):
        w = wrap_phase(p)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.cos(w), math.cos(p), abs_tol=1e-9)


class TestQPoch:
    def test_finite_examples(self):
        assert math.isclose(qpoch_finite(0.5, 0.5, 2).to_complex().real, 0.375)
        assert math.isclose(qpoch_finite(2, 0.5, 1).to_complex().real, -1.0)
        assert qpoch_finite(0.3, 0.5, 0).to_complex() == 1

    def test_finite_exact_zero(self):
        # a = q^{-1} kills the second factor
        assert qpoch_finite(2.0, 0.5, 3).is_zero

    def test_infinite_reference_value(self):
        assert math.isclose(qpoch_infinite(0.5, 0.5).to_complex().real, 0.2887880950866024, rel_tol=1e-12)

    @given(args, moduli, st.integers(0, 60))
    def test_finite_matches_oracle(self, a, q, n):
        assert close(qpoch_finite(a, q, n), mp_qpoch(a, q, n), rel=1e-11)

    @given(args, moduli)
    def test_infinite_matches_oracle(self, a, q):
        ref = mp_qpoch(a, q)
        v = qpoch_infinite(a, q)
        assert abs(v.to_complex() - ref) <= 1e-11 * max(1.0, abs(ref))

    @given(st.complex_numbers(max_magnitude=0.9, allow_nan=False), moduli)
    def test_certificate_covers_true_error(self, a, q):
        cert = qpoch_infinite_certified(a, q)
        ref = mp_qpoch(a, q)
        assert 0 <= cert.rel_err < 1e-12
        assert abs(cert.value.to_complex() - ref) <= (cert.rel_err + 1e-14) * abs(ref)

    @given(args, moduli, st.integers(0, 30))
    def test_finite_times_tail_is_infinite(self, a, q, n):
        head = qpoch_finite(a, q, n).to_complex()
        tail = qpoch_infinite(a * q**n, q).to_complex()
        ref = qpoch_infinite(a, q).to_complex()
        assert abs(head * tail - ref) <= 1e-10 * max(1.0, abs(ref), abs(head * tail))

    @pytest.mark.parametrize("log_a", [3 + 1j, 50 - 2j, 800 + 0.3j])
    def test_large_arguments_in_log_domain(self, log_a):
        q = 0.5
        got = log_qpoch_inf_logs(complex(log_a), math.log(q))[0]
        with mpmath.workdps(60):
            ref = mpmath.log(mpmath.qp(-mpmath.exp(mpmath.mpc(log_a)) * -1, mpmath.mpf(q)))
        assert math.isclose(got.real, float(ref.real), rel_tol=1e-12)
        assert abs(cmath.exp(1j * (got.imag - float(ref.imag))) - 1) < 1e-9


class TestLemma1:
    def test_example(self):
        lo, hi = lemma1_bounds(1, 0.5, 4)
        assert lo == pytest.approx(0.25) and hi == pytest.approx(0.25)

    def test_outside_hypothesis(self):
        with pytest.raises(HypothesisViolated):
            lemma1_bounds(1, 0.5, 1)

    @given(args, moduli, st.integers(1, 40))
    def test_bounds_hold(self, z, q, n):
        x = abs(z) * q**n / (1 - q)
        if not 0 < x < 0.5:
            with pytest.raises(HypothesisViolated):
                lemma1_bounds(z, q, n)
            return
        b1, b2 = lemma1_bounds(z, q, n)
        p = mp_qpoch(z * q**n, q)
        assert abs(p - 1) <= b1 * (1 + 1e-12)
        assert abs(1 / p - 1) <= b2 * (1 + 1e-12)


class TestQGamma:
    def test_near_classical_limit(self):
        assert qgamma(3, 0.999).to_complex().real == pytest.approx(2.0, rel=0.01)

    def test_pole(self):
        with pytest.raises(PoleError):
            qgamma(-2, 0.5)

    @given(st.floats(0.1, 6.0), moduli)
    def test_functional_equation(self, x, q):
        # Gamma_q(x+1) = [x]_q Gamma_q(x)
        lhs = qgamma(x + 1, q).to_complex()
        rhs = (1 - q**x) / (1 - q) * qgamma(x, q).to_complex()
        assert lhs == pytest.approx(rhs, rel=1e-11)


def test_qparam_from_log_keeps_one_minus_q_accurate():
    p = QParam.from_log(-1e-12)
    assert p.one_minus_q == pytest.approx(1e-12, rel=1e-9)
    with pytest.raises(DomainError):
        QParam(1.0)
    assert np.isfinite(p.ln_q)
