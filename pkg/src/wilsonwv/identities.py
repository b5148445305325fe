"""Numerical identity suites for the Wilson operator calculus.

Each suite returns a :class:`SuiteResult` with the worst relative residual
over its sample and the tolerance it is held to.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp, mpc, mpf

from .difference_equations import (
    counterexample_equation,
    counterexample_f,
    counterexample_identities,
    eigen_check,
    equation_residual,
    newton_polygon,
)
from .errors import EvaluationError
from .numerics import HALF_I, bits_of, sqrt_w, to_mpc
from .operators import (
    apply_aw,
    apply_dw,
    apply_dw_iterated,
    apply_word,
    commutator_residual,
    cooper_dw_n,
    leibniz_dw_n,
    quotient_dw,
)
from .series import tau_eval

__all__ = ["SuiteResult", "SUITES", "run_suite", "run_all", "random_points", "random_polynomial"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_residual: mpf
    tolerance: float
    samples: int
    extra: tuple = ()

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance) and all(ok for _, ok in self.extra)


def random_points(rng: random.Random, count: int = 20):
    """Points in the right half-plane, clear of the lattice degeneracies."""
    return [mpc(rng.uniform(0.5, 30.0), rng.uniform(-15.0, 15.0)) for _ in range(count)]


def random_polynomial(rng: random.Random, max_degree: int = 6):
    deg = rng.randint(1, max_degree)
    return [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(deg)] + [Fraction(rng.choice([-3, -2, -1, 1, 2, 3]))]


def _poly_fn(coeffs):
    cs = [mpf(c.numerator) / c.denominator for c in coeffs]

    def f(x):
        out = mpc(0)
        for c in reversed(cs):
            out = out * x + c
        return out

    return f


def _rel(a, b, floor=0):
    scale = max(abs(a), abs(b), floor)
    return abs(a - b) / scale if scale else mpf(0)


def _floor(f, x, k, bits):
    # values that cancel to zero are measured against the inputs on the lattice
    z = sqrt_w(to_mpc(x))
    big = max(abs(to_mpc(f((z + m * HALF_I) ** 2))) for m in range(-k, k + 1))
    return big * mpf(2) ** (-(bits // 2))


def _entire_samples():
    return [
        lambda x: mpmath.exp(x / 9) + x**2,
        lambda x: mpmath.cos(mpmath.sqrt(x)) * (1 + x),
        lambda x: mpmath.sinc(x / 11),
    ]


def suite_product(rng, bits, n=None):
    worst = mpf(0)
    pts = random_points(rng)
    for x in pts:
        f, g = _poly_fn(random_polynomial(rng)), _poly_fn(random_polynomial(rng))
        lhs = apply_dw(lambda y: f(y) * g(y), x, bits)
        rhs = apply_aw(f, x, bits) * apply_dw(g, x, bits) + apply_dw(f, x, bits) * apply_aw(g, x, bits)
        worst = max(worst, _rel(lhs, rhs))
    return SuiteResult("product", worst, 1e-10, len(pts))


def suite_quotient(rng, bits, n=None):
    worst = mpf(0)
    pts = random_points(rng)
    for x in pts:
        f, g = _poly_fn(random_polynomial(rng)), _poly_fn(random_polynomial(rng))
        try:
            lhs = apply_dw(lambda y: f(y) / g(y), x, bits)
            rhs = quotient_dw(f, g, x, bits)
        except (ZeroDivisionError, EvaluationError):
            continue
        worst = max(worst, _rel(lhs, rhs))
    return SuiteResult("quotient", worst, 1e-10, len(pts))


def suite_commutator(rng, bits, n=None):
    worst = mpf(0)
    pts = random_points(rng)
    for x in pts:
        f = _poly_fn(random_polynomial(rng))
        with mp.workprec(bits):
            scale = max(abs(apply_word(f, x, w, bits)) for w in ("AD", "DA", "DD"))
        res = abs(commutator_residual(f, x, bits))
        worst = max(worst, res / scale if scale else res)
    return SuiteResult("commutator", worst, 1e-10, len(pts))


def suite_leibniz(rng, bits, n=5):
    worst = mpf(0)
    pts = random_points(rng)
    for x in pts:
        f, g = _poly_fn(random_polynomial(rng)), _poly_fn(random_polynomial(rng))
        fg = lambda y: f(y) * g(y)  # noqa: E731
        for k in range(n + 1):
            lhs = apply_dw_iterated(fg, x, k, bits)
            rhs = leibniz_dw_n(f, g, x, k, bits)
            worst = max(worst, _rel(lhs, rhs, _floor(fg, x, k, bits)))
    return SuiteResult("leibniz", worst, 1e-10, len(pts))


def suite_cooper(rng, bits, n=6):
    worst = mpf(0)
    pts = random_points(rng)
    fns = _entire_samples()
    for i, x in enumerate(pts):
        f = _poly_fn(random_polynomial(rng, 10)) if i % 2 == 0 else fns[i % len(fns)]
        for k in range(n + 1):
            lhs = apply_dw_iterated(f, x, k, bits)
            rhs = cooper_dw_n(f, x, k, bits)
            worst = max(worst, _rel(lhs, rhs, _floor(f, x, k, bits)))
    return SuiteResult("cooper", worst, 1e-9, len(pts))


def suite_taurule(rng, bits, n=8):
    worst = mpf(0)
    pts = random_points(rng)
    with mp.workprec(bits):
        bases = [mpc(0), mpc(rng.uniform(0.5, 5), rng.uniform(-2, 2))]
        for x in pts:
            for x0 in bases:
                z1 = sqrt_w(x0) + HALF_I
                for k in range(1, n + 1):
                    lhs = apply_dw(lambda y: tau_eval(k, y, x0, bits), x, bits)
                    rhs = -k * tau_eval(k - 1, x, prec=bits, z0=z1)
                    worst = max(worst, _rel(lhs, rhs))
    return SuiteResult("taurule", worst, 1e-12, len(pts))


def suite_eigen(rng, bits, n=None):
    pts = [1, 4, 9, 16, 25]
    worst = max(eigen_check(1, pts, bits).max_residual, eigen_check(2, pts, bits).max_residual)
    return SuiteResult("eigen", worst, 1e-6, len(pts))


def suite_counterexample(rng, bits, n=None):
    pts = [1, 4, 25]
    ident = counterexample_identities(pts, bits).max_residual
    eq = counterexample_equation()
    res = equation_residual(eq, lambda x: counterexample_f(x, bits), pts, bits)
    slopes = newton_polygon(eq).edge_slopes
    extra = (
        ("equation_residual<=1e-6", bool(res <= 1e-6)),
        ("slopes=={1}", slopes == (Fraction(1),)),
        ("1/2 not a slope", Fraction(1, 2) not in slopes),
    )
    return SuiteResult("counterexample", ident, 1e-8, len(pts), extra)


SUITES = {
    "product": suite_product,
    "quotient": suite_quotient,
    "commutator": suite_commutator,
    "leibniz": suite_leibniz,
    "cooper": suite_cooper,
    "taurule": suite_taurule,
    "eigen": suite_eigen,
    "counterexample": suite_counterexample,
}


def run_suite(name: str, seed: int = 0, prec=None, n=None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    rng = random.Random(f"{name}:{seed}")
    bits = bits_of(prec)
    kwargs = {} if n is None else {"n": n}
    with mp.workprec(bits):
        return SUITES[name](rng, bits, **kwargs)


def run_all(seed: int = 0, prec=None, only=None, n=None) -> list:
    names = list(SUITES) if not only else list(only)
    return [run_suite(name, seed, prec, n) for name in names]
