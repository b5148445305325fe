import cmath
import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpc, mpf

from wilsonwv.errors import EvaluationError, PoleError, PreconditionError
from wilsonwv.numerics import (
    PrecisionPolicy,
    bits_of,
    gamma_product_oracle,
    log_gamma,
    max_modulus,
    node,
    reciprocal_gamma,
    sqrt_w,
)


reals = st.floats(min_value=-6, max_value=6)


def _close(a, b, tol):
    return abs(a - b) <= tol * max(1, abs(b))


class TestPrecision:
    def test_default(self):
        assert bits_of(None) == 128
        assert PrecisionPolicy().bits == 128

    def test_rejects_low(self):
        with pytest.raises(PreconditionError):
            PrecisionPolicy(52)


class TestSqrtW:
    def test_examples(self):
        assert sqrt_w(4) == 2
        assert sqrt_w(-1) == mpc(0, 1)
        assert sqrt_w(mpf(-0.25)) == mpc(0, 0.5)
        assert sqrt_w(0) == 0

    def test_branch_on_negative_axis(self):
        # arg pi/2 belongs to the branch, -pi/2 does not
        w = sqrt_w(mpc(-9, 0))
        assert w.real == 0 and w.imag == 3

    @settings(max_examples=300, deadline=None)
    @given(mag=reals, phase=st.floats(min_value=-math.pi, max_value=math.pi))
    def test_square_and_arg(self, mag, phase):
        x = mpmath.mpf(10) ** mag * mpmath.expj(phase)
        w = sqrt_w(x)
        assert abs(w * w - x) <= abs(x) * mpf(2) ** -120
        assert w.real > 0 or (w.real == 0 and w.imag >= 0)


class TestNode:
    def test_examples(self):
        assert node(0, 1) == mpf(-0.25)
        for j in (1, 2, 3):
            assert node(0, 2 * j) == -j * j
        x = mpc(3, -2)
        assert node(x, 0) == x

    @settings(max_examples=200, deadline=None)
    @given(re=st.floats(min_value=0.01, max_value=100), im=st.floats(min_value=-100, max_value=100))
    def test_closed_form_equals_recursion_off_cut(self, re, im):
        x = mpc(re, im)
        assert abs(node(node(x, 1), 1) - node(x, 2)) <= 1e-30 * max(1, abs(x))

    def test_recursion_deviates_on_cut(self):
        # y^- = (i/4 - i/2)^2 = -1/16 lands back on the cut with root i/4,
        # so the recursion is stuck while the closed form keeps stepping
        y = mpf(-1) / 16
        rec = node(node(y, -1), -1)
        closed = node(y, -2)
        assert closed == mpf(-9) / 16
        assert rec == mpf(-1) / 16
        assert rec != closed

    @settings(max_examples=100, deadline=None)
    @given(re=st.floats(min_value=-50, max_value=50), im=st.floats(min_value=-50, max_value=50), m=st.integers(1, 6))
    def test_pair_branch_independent(self, re, im, m):
        x = mpc(re, im)
        z = sqrt_w(x)
        pair = sorted([(z + m * 0.5j) ** 2, (z - m * 0.5j) ** 2], key=lambda v: (float(v.real), float(v.imag)))
        flipped = sorted([(-z + m * 0.5j) ** 2, (-z - m * 0.5j) ** 2], key=lambda v: (float(v.real), float(v.imag)))
        for a, b in zip(pair, flipped):
            assert abs(a - b) <= 1e-30 * max(1, abs(a))


class TestGamma:
    def test_examples(self):
        assert _close(log_gamma(5), mpmath.log(24), mpf(2) ** -120)
        assert _close(log_gamma(0.5), mpmath.log(mpmath.sqrt(mpmath.pi)), mpf(2) ** -120)

    def test_product_oracle(self):
        oracle = gamma_product_oracle(1 + 1j)
        ours = complex(mpmath.exp(log_gamma(mpc(1, 1))))
        assert abs(ours - oracle) <= 1e-10 * abs(oracle)

    def test_product_oracle_against_math(self):
        assert abs(gamma_product_oracle(4.5) - math.gamma(4.5)) <= 1e-10 * math.gamma(4.5)

    def test_poles(self):
        with pytest.raises(PoleError):
            log_gamma(-3)
        assert reciprocal_gamma(-3) == 0
        assert reciprocal_gamma(0) == 0

    @settings(max_examples=100, deadline=None)
    @given(re=st.floats(min_value=-10, max_value=10), im=st.floats(min_value=-10, max_value=10))
    def test_functional_equation(self, re, im):
        z = mpc(re, im)
        if abs(z) > 10 or min(abs(z - k) for k in range(-11, 1)) < 1e-3:
            return
        lhs = reciprocal_gamma(z + 1)
        rhs = reciprocal_gamma(z) / z
        assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


class TestMaxModulus:
    def test_square_constant_on_circle(self):
        mm = max_modulus(lambda x: x * x, 2)
        assert abs(mm.value - 4) < 1e-30
        assert abs(abs(mm.point) - 2) < 1e-30

    def test_positive_coefficients_peak_on_axis(self):
        f = lambda x: mpmath.exp(x) + x**3  # noqa: E731
        mm = max_modulus(f, 3)
        assert abs(mm.value - f(mpf(3))) < 1e-25
        dense = max(abs(f(3 * mpmath.expj(2 * mpmath.pi * k / 4096))) for k in range(4096))
        assert mm.value >= dense - 1e-25

    def test_triangle_equality(self):
        mm = max_modulus(lambda x: x + 1, 1)
        assert abs(mm.value - 2) < 1e-30
        assert abs(mm.point - 1) < 1e-20

    def test_nonfinite(self):
        with pytest.raises(EvaluationError) as info:
            max_modulus(lambda x: mpmath.inf if x.real > 0.9 else x, 1)
        assert info.value.point is not None

    def test_samples_floor(self):
        with pytest.raises(PreconditionError):
            max_modulus(lambda x: x, 1, samples=4)


def test_oracle_is_double_precision_only():
    assert isinstance(gamma_product_oracle(2.5), complex)
    assert abs(gamma_product_oracle(2.5) - cmath.exp(math.lgamma(2.5))) < 1e-10
