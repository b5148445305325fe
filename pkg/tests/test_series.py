import math
import random
import warnings
from fractions import Fraction as Fr

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpc, mpf

from wilsonwv.combinatorics import apply_matrix, maclaurin_to_wilson_matrix, wilson_to_maclaurin_matrix
from wilsonwv.errors import GrowthGateWarning, PreconditionError, TruncationError
from wilsonwv.numerics import node
from wilsonwv.operators import apply_dw, cooper_dw_n
from wilsonwv.series import (
    EntireFunctionSpec,
    WilsonSeries,
    dw_of_series,
    eval_wilson,
    expand_wilson,
    expansion_bits,
    growth_gate,
    parse_function_spec,
    parse_number,
    partial_sum_convergence_probe,
    tau_eval,
)

FP4 = EntireFunctionSpec.factorial_power(4)


@pytest.fixture(scope="module")
def fp4_60():
    return expand_wilson(FP4, 0, 60, gate=False)


def maclaurin_oracle(gamma, x, terms=200):
    # independent direct sum of x^k/(k!)^gamma
    with mp.workprec(200):
        total, term = mpc(0), mpc(1)
        for k in range(terms):
            if k:
                term *= x / mpf(k) ** gamma
            total += term
        return total


class TestParsing:
    def test_numbers(self):
        assert parse_number("3/4") == Fr(3, 4)
        assert parse_number("0.125") == Fr(1, 8)
        assert parse_number(["2", "0"]) == 2
        assert parse_number(["1", "-1/2"]) == (1, Fr(-1, 2))
        with pytest.raises(PreconditionError):
            parse_number("abc")
        with pytest.raises(PreconditionError):
            parse_number(True)

    def test_specs(self):
        assert parse_function_spec({"kind": "builtin", "name": "factorial_power", "gamma": "5"}).known_order() == 0.2
        assert parse_function_spec({"kind": "polynomial", "coeffs": ["1", "2"]}).exact_polynomial() == (1, 2)
        m = parse_function_spec({"kind": "maclaurin", "coeffs": ["1", "1/2"], "tail_bound": "1/1000"})
        assert m.tail_bound == Fr(1, 1000)
        with pytest.raises(PreconditionError):
            parse_function_spec({"kind": "nope"})
        with pytest.raises(PreconditionError):
            parse_function_spec({"kind": "builtin", "name": "nope"})

    def test_wilson_kind_evaluates(self):
        f = parse_function_spec({"kind": "wilson", "x0": ["0", "0"], "coeffs": ["0", "1", "1"]})
        x = mpc(3, 1)
        assert abs(f(x) - x * x) < 1e-30


class TestTau:
    def test_examples(self):
        x = mpc(2, 7)
        assert tau_eval(0, x) == 1
        assert tau_eval(1, x) == -x
        assert abs(tau_eval(2, x) - x * (1 + x)) < 1e-30
        x0 = mpc(3, -1)
        for k in range(1, 5):
            assert abs(tau_eval(k, x0, x0)) < 1e-30

    def test_positive_axis_modulus(self):
        r = mpf(17)
        for n in range(8):
            prod = mpf(1)
            for j in range(n):
                prod *= r + j * j
            assert abs(abs(tau_eval(n, r)) - prod) <= 1e-30 * prod


class TestGate:
    def test_polynomial(self):
        g = growth_gate(EntireFunctionSpec.polynomial(["1", "0", "3"]))
        vals = [v for _, v in g.samples]
        assert g.passed and g.value < 0.1
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_factorial_power(self):
        g = growth_gate(FP4)
        assert g.passed and g.value < 0.25

    def test_gamma_reciprocal_sum_fails(self):
        assert not growth_gate(EntireFunctionSpec.gamma_reciprocal_sum()).passed

    def test_bad_radii(self):
        with pytest.raises(PreconditionError):
            growth_gate(FP4, [10, 5])

    def test_expand_warns(self):
        with pytest.warns(GrowthGateWarning):
            s = expand_wilson(EntireFunctionSpec.gamma_reciprocal_sum(), 0, 4)
        assert any("growth gate" in c for c in s.caveats)


class TestExpand:
    def test_square_exact(self):
        s = expand_wilson(EntireFunctionSpec.polynomial([0, 0, 1]), 0, 6)
        assert s.exact == (0, 1, 1, 0, 0, 0, 0)
        assert s.complete

    def test_square_numeric_route(self):
        # the interpolation sum on a black box reproduces a = [0, 1, 1, 0, ...]
        s = expand_wilson(lambda x: x * x, 0, 6)
        for got, want in zip(s.coeffs, [0, 1, 1, 0, 0, 0, 0]):
            assert abs(got - want) < 1e-30

    def test_hand_evaluation_of_a2(self):
        # a_2 = (1/2)[-2 f(-1)/(1 * 3) + f(-4)/((2)_2 (5)_0)] for f = x^2
        a2 = Fr(1, 2) * (-2 * Fr(1) / 3 + Fr(16, 6))
        assert a2 == 1

    def test_constant(self):
        s = expand_wilson(EntireFunctionSpec.polynomial(["5/3"]), 0, 4)
        assert s.exact == (Fr(5, 3), 0, 0, 0, 0)
        assert expand_wilson(EntireFunctionSpec.polynomial(["5/3"]), 0, 0).exact == (Fr(5, 3),)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.fractions(min_value=-99, max_value=99, max_denominator=20), min_size=1, max_size=21))
    def test_polynomial_matches_matrix(self, b):
        while len(b) > 1 and b[-1] == 0:
            b = b[:-1]
        d = len(b) - 1
        s = expand_wilson(EntireFunctionSpec.polynomial(b), 0, d + 3)
        a = apply_matrix(maclaurin_to_wilson_matrix(d), b)
        assert list(s.exact) == a + [0, 0, 0]
        assert apply_matrix(wilson_to_maclaurin_matrix(d), a) == b

    def test_polynomial_numeric_route_matches_exact(self):
        # x0 away from 0 forces the interpolation route; compare values, not coefficients
        f = EntireFunctionSpec.polynomial(["1", "-2", "0", "1/3", "1/7"])
        s = expand_wilson(f, mpc(2, 1), 10)
        for k in range(5, 11):
            assert abs(s.coeffs[k]) < 1e-25
        x = mpc(4, -3)
        assert abs(eval_wilson(s, x).value - f(x)) < 1e-20 * abs(f(x))

    def test_two_precision_agreement(self):
        lo = expand_wilson(FP4, 0, 40, gate=False)
        hi = expand_wilson(FP4, 0, 40, prec=2 * lo.bits, gate=False)
        for a, b in zip(lo.coeffs, hi.coeffs):
            assert abs(a - b) <= mpf(2) ** (-(lo.bits // 2)) * abs(b)

    def test_bits_schedule(self):
        assert expansion_bits(0) == 128
        assert expansion_bits(120) == 64 + 3316
        assert expansion_bits(10, 512) == 512

    def test_bad_n_max(self):
        with pytest.raises(PreconditionError):
            expand_wilson(FP4, 0, -1)

    @pytest.mark.parametrize("name", ["factorial_power", "bessel_eigen_1", "gamma_reciprocal_sum"])
    def test_coefficient_identity(self, name):
        # a_n = ((-1)^n/n!) (D_W^n f)(0^{+(n)})
        f = {
            "factorial_power": FP4,
            "bessel_eigen_1": EntireFunctionSpec.bessel_eigen_1(1),
            "gamma_reciprocal_sum": EntireFunctionSpec.gamma_reciprocal_sum(),
        }[name]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GrowthGateWarning)
            s = expand_wilson(f, 0, 12, gate=False)
        h = f.handle(256)
        for n in range(13):
            d = cooper_dw_n(h, node(0, n), n, 256)
            rhs = (-1) ** n * d / mpmath.factorial(n)
            assert abs(s.coeffs[n] - rhs) <= 1e-9 * max(abs(rhs), mpf(10) ** -40)


class TestEvaluate:
    def test_round_trip_square(self):
        s = expand_wilson(EntireFunctionSpec.polynomial([0, 0, 1]), 0, 2)
        v = eval_wilson(s, mpc(7, 2))
        assert v.value == mpc(45, 28) and v.tail == 0

    def test_constant(self):
        s = WilsonSeries.from_coeffs(0, [Fr(9, 2)])
        assert eval_wilson(s, mpc(-3, 8)).value == mpf(4.5)

    def test_factorial_power(self, fp4_60):
        got = eval_wilson(fp4_60, 10).value
        want = maclaurin_oracle(4, mpf(10))
        assert abs(got - want) <= 1e-12 * abs(want)

    def test_random_disc(self, fp4_60):
        rng = random.Random(3)
        poly = EntireFunctionSpec.polynomial(["2", "-1/3", "0", "5/7"])
        ps = expand_wilson(poly, 0, 3)
        for _ in range(50):
            rad, th = 20 * rng.random() ** 0.5, 2 * mpmath.pi * rng.random()
            x = rad * mpmath.expj(th)
            want = maclaurin_oracle(4, x)
            assert abs(eval_wilson(fp4_60, x).value - want) <= 1e-10 * abs(want)
            assert abs(eval_wilson(ps, x).value - poly(x)) <= 1e-10 * max(1, abs(poly(x)))

    def test_truncation(self):
        s = expand_wilson(FP4, 0, 5, gate=False)
        with pytest.raises(TruncationError) as info:
            eval_wilson(s, 1e4)
        assert info.value.last_term is not None


class TestDwSeries:
    def test_square(self):
        s = dw_of_series(expand_wilson(EntireFunctionSpec.polynomial([0, 0, 1]), 0, 2))
        assert s.exact == (-1, -2)
        assert abs(s.x0 - mpf(-0.25)) < 1e-30
        rng = random.Random(5)
        for _ in range(10):
            x = mpc(rng.uniform(-9, 9), rng.uniform(-9, 9))
            assert abs(eval_wilson(s, x).value - (2 * x - mpf(1) / 2)) < 1e-28

    def test_constant(self):
        s = dw_of_series(WilsonSeries.from_coeffs(0, [Fr(3)]))
        assert s.exact == (0,)

    def test_random_points(self, fp4_60):
        d = dw_of_series(fp4_60)
        rng = random.Random(11)
        h = FP4.handle(192)
        for _ in range(30):
            x = mpc(rng.uniform(0.5, 15), rng.uniform(-10, 10))
            want = apply_dw(h, x, 192)
            assert abs(eval_wilson(d, x).value - want) <= 1e-10 * abs(want)

    def test_iterated_matches_cooper(self, fp4_60):
        d = fp4_60
        h = FP4.handle(192)
        x = mpc(3, 2)
        for n in range(1, 5):
            d = dw_of_series(d)
            want = cooper_dw_n(h, x, n, 192)
            assert abs(eval_wilson(d, x).value - want) <= 1e-10 * abs(want)


class TestProbe:
    def test_polynomial(self):
        coeffs = expand_wilson(EntireFunctionSpec.polynomial([0, 0, 1]), 0, 8).exact
        assert partial_sum_convergence_probe(coeffs, "0", mpc(3, 1)).verdict == "converges"

    def test_factorials_diverge(self):
        coeffs = [Fr(math.factorial(k)) for k in range(30)]
        assert partial_sum_convergence_probe(coeffs, "0", 1.5).verdict == "diverges"

    def test_factorial_power(self, fp4_60):
        assert partial_sum_convergence_probe(list(fp4_60.coeffs), "0", mpc(2, 1)).verdict == "converges"

    def test_on_node(self):
        with pytest.raises(PreconditionError):
            partial_sum_convergence_probe(["1", "1"], "0", 0)
