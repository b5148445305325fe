"""Linear Wilson difference equations with polynomial coefficients.

Newton polygons, substitution residuals, the Bessel eigenfunctions of D_W
and the order-1/2 counterexample built from reciprocal gamma values.
"""
from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath
from mpmath import mp, mpc, mpf

from .errors import DegenerateNodeError, EvaluationError, PreconditionError, SpecParseError
from .numerics import bits_of, sqrt_w, to_mpc
from .operators import _Lattice, as_handle

__all__ = [
    "WilsonDifferenceEquation",
    "NewtonPolygon",
    "newton_polygon",
    "equation_residual",
    "BesselValue",
    "bessel_i_series",
    "bessel_i",
    "bessel_k",
    "bessel_eigenfunction",
    "eigen_check",
    "counterexample_f",
    "counterexample_g",
    "counterexample_equation",
    "counterexample_identities",
    "nu_power_law_fit",
    "parse_equation",
    "parse_equation_text",
]

I = mpc(0, 1)


def _trim(poly):
    poly = list(poly)
    while poly and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


def _poly_eval(poly, x):
    out = mpc(0)
    for c in reversed(poly):
        out = out * x + (mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else c)
    return out


@dataclass(frozen=True)
class WilsonDifferenceEquation:
    """a_n D_W^n y + ... + a_1 D_W y + a_0 y = 0.

    ``coeff_polys[k]`` holds a_k as ascending exact coefficients.
    """

    coeff_polys: tuple

    def __post_init__(self):
        polys = tuple(_trim(Fraction(c) for c in p) for p in self.coeff_polys)
        if not polys or not polys[-1]:
            raise PreconditionError("leading coefficient a_n must not vanish identically")
        object.__setattr__(self, "coeff_polys", polys)

    @property
    def order(self) -> int:
        return len(self.coeff_polys) - 1

    def degree(self, k: int) -> int:
        p = self.coeff_polys[k]
        return len(p) - 1 if p else -1


@dataclass(frozen=True)
class NewtonPolygon:
    points: tuple
    hull_vertices: tuple
    edge_slopes: tuple

    @property
    def predicted_orders(self) -> tuple:
        return tuple(s for s in self.edge_slopes if s > 0)

    @property
    def admissible(self) -> tuple:
        """Positive slopes below 1/3, where growth predictions apply."""
        return tuple(s for s in self.edge_slopes if 0 < s < Fraction(1, 3))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def newton_polygon(eq: WilsonDifferenceEquation) -> NewtonPolygon:
    """Finite upper chain of the hull of {x >= k, y <= deg a_{n-k} - (n-k)}.

    The chain runs from k = 0 to the first point of maximal height; beyond it
    the boundary is a horizontal ray. Slopes are exact and reported in
    ascending order.
    """
    n = eq.order
    pts = [(k, Fraction(eq.degree(n - k) - (n - k))) for k in range(n + 1) if eq.coeff_polys[n - k]]
    top = max(p[1] for p in pts)
    stop = next(i for i, p in enumerate(pts) if p[1] == top)
    chain = []
    for p in pts[: stop + 1]:
        while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) >= 0:
            chain.pop()
        chain.append(p)
    slopes = sorted({(b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(chain, chain[1:])})
    return NewtonPolygon(tuple(pts), tuple(chain), tuple(slopes))


def equation_residual(eq: WilsonDifferenceEquation, f, points, prec=None) -> mpf:
    """Max over points of |sum a_k D_W^k f| / (sum |a_k| |D_W^k f| + tiny)."""
    f = as_handle(f)
    bits = bits_of(prec)
    worst = mpf(0)
    with mp.workprec(bits):
        tiny = mpf(2) ** (-bits)
        for x in points:
            x = to_mpc(x)
            lat = _Lattice(f, sqrt_w(x), bits)
            total = mpc(0)
            scale = mpf(0)
            for k, poly in enumerate(eq.coeff_polys):
                if not poly:
                    continue
                term = _poly_eval(poly, x) * lat.word("D" * k)
                total += term
                scale += abs(term)
            if scale == 0:
                continue
            worst = max(worst, abs(total) / (scale + tiny))
    return worst


# ---------------------------------------------------------------- Bessel functions


class BesselValue(NamedTuple):
    value: mpc
    tail_bound: mpf
    terms: int


def bessel_i_series(alpha, z, terms: int = 500, prec=None) -> BesselValue:
    """I_alpha(z) = sum_k (z/2)^(2k+alpha) / (k! Gamma(k+alpha+1)), principal power.

    Summation stops after three consecutive terms below 2^(-bits/2) times the
    running scale, or at ``terms`` terms. The tail bound comes from the ratio
    test once the term ratio has dropped below 1.
    """
    if terms < 10:
        raise PreconditionError("bessel_i needs at least 10 terms")
    bits = bits_of(prec)
    with mp.workprec(bits + 16):
        alpha, z = to_mpc(alpha), to_mpc(z)
        if z == 0:
            if alpha == 0:
                return BesselValue(mpc(1), mpf(0), 1)
            raise PreconditionError("I_alpha(0) is only handled for alpha = 0")
        half = z / 2
        lead = mpmath.exp(alpha * mpmath.log(half))
        q2 = half * half
        term = lead * mpmath.rgamma(alpha + 1)
        total = term
        scale = abs(total)
        eps = mpf(2) ** (-(bits // 2))
        small = 0
        k = 0
        ratio = mpf(1)
        while k + 1 < terms:
            # t_{k+1}/t_k = (z/2)^2 / ((k+1)(k+alpha+1)); Gamma handled by rgamma at poles
            k += 1
            denom = k * (k + alpha)
            if denom == 0:
                term = q2**k * lead * mpmath.rgamma(k + alpha + 1) / mpmath.factorial(k)
            else:
                term = term * q2 / denom
            total += term
            scale = max(scale, abs(total), abs(term))
            ratio = abs(q2) / abs(k + 1) / max(abs(k + 1 + alpha), mpf(1) / 2)
            small = small + 1 if abs(term) <= eps * scale else 0
            if small >= 3:
                break
        else:
            if ratio >= 1:
                raise EvaluationError(f"Bessel series for order {alpha} did not converge in {terms} terms", point=z)
        tail = abs(term) * ratio / (1 - ratio) if ratio < 1 else mpmath.inf
        return BesselValue(total, tail, k + 1)


def bessel_i(alpha, z, terms: int = 500, prec=None) -> mpc:
    return bessel_i_series(alpha, z, terms, prec).value


def bessel_k(alpha, z, terms: int = 500, prec=None) -> mpc:
    """K_alpha(z) = pi/(2 sin(alpha pi)) [I_{-alpha}(z) - I_alpha(z)].

    At integer alpha the removable singularity is handled by averaging
    alpha +- h with h = 2^(-bits/3).
    """
    bits = bits_of(prec)
    with mp.workprec(bits + 16):
        alpha = to_mpc(alpha)
        s = mpmath.sin(alpha * mpmath.pi)
        if abs(s) < mpf(2) ** (-(bits // 3)):
            h = mpf(2) ** (-(bits // 3))
            return (bessel_k(alpha + h, z, terms, bits + 64) + bessel_k(alpha - h, z, terms, bits + 64)) / 2
        diff = bessel_i(-alpha, z, terms, bits) - bessel_i(alpha, z, terms, bits)
        return mpmath.pi / (2 * s) * diff


def bessel_eigenfunction(family: int, lam, x, prec=None) -> mpc:
    """Entire eigenfunctions of D_W for the eigenvalue lam.

    family 1: I_{2i sqrt x}(2/lam) + I_{-2i sqrt x}(2/lam)
    family 2: K_{2i sqrt x}(-2/lam) + K_{-2i sqrt x}(-2/lam)
    """
    bits = bits_of(prec)
    with mp.workprec(bits + 16):
        lam = to_mpc(lam)
        if lam == 0:
            raise PreconditionError("eigenvalue must be nonzero")
        a = 2 * I * sqrt_w(x)
        w = 2 / lam
        if family == 1:
            return bessel_i(a, w, prec=bits) + bessel_i(-a, w, prec=bits)
        if family == 2:
            return bessel_k(a, -w, prec=bits) + bessel_k(-a, -w, prec=bits)
    raise PreconditionError("family must be 1 or 2")


@dataclass(frozen=True)
class EigenReport:
    lam: mpc
    points: tuple
    residual_f1: tuple
    residual_f2: tuple

    @property
    def max_residual(self):
        return max(self.residual_f1 + self.residual_f2)


def eigen_check(lam, points, prec=None) -> EigenReport:
    """Relative residuals |D_W f_i - lam f_i| / |f_i| for both families."""
    from .operators import apply_dw

    bits = bits_of(prec)
    out = {1: [], 2: []}
    with mp.workprec(bits):
        lam = to_mpc(lam)
        for fam in (1, 2):
            f = lambda x, fam=fam: bessel_eigenfunction(fam, lam, x, bits)  # noqa: E731
            for x in points:
                v = f(to_mpc(x))
                d = apply_dw(f, x, bits)
                out[fam].append(abs(d - lam * v) / abs(v))
    return EigenReport(lam, tuple(points), tuple(out[1]), tuple(out[2]))


# ---------------------------------------------------------------- counterexample


def counterexample_f(x, prec=None) -> mpc:
    """1/Gamma(2i sqrt x) + 1/Gamma(-2i sqrt x)."""
    with mp.workprec(bits_of(prec)):
        a = 2 * I * sqrt_w(x)
        return mpmath.rgamma(a) + mpmath.rgamma(-a)


def counterexample_g(x, prec=None) -> mpc:
    """(1/(2i sqrt x)) [1/Gamma(2i sqrt x) - 1/Gamma(-2i sqrt x)]."""
    with mp.workprec(bits_of(prec)):
        a = 2 * I * sqrt_w(x)
        if a == 0:
            raise DegenerateNodeError("g needs its limit at x = 0")
        return (mpmath.rgamma(a) - mpmath.rgamma(-a)) / a


def counterexample_equation() -> WilsonDifferenceEquation:
    a0 = (5, 16, 32, 64)
    a1 = (0, -16, -64, -128)
    a2 = (0, 4, 32, 64)
    return WilsonDifferenceEquation((a0, a1, a2))


@dataclass(frozen=True)
class IdentityReport:
    points: tuple
    first: tuple
    second: tuple

    @property
    def max_residual(self):
        return max(self.first + self.second)


def counterexample_identities(points, prec=None) -> IdentityReport:
    """Relative residuals of the closed forms of D_W f and D_W^2 f in terms of f and g."""
    from .operators import apply_dw_iterated

    bits = bits_of(prec)
    first, second = [], []
    with mp.workprec(bits):
        f = lambda x: counterexample_f(x, bits)  # noqa: E731
        for x in points:
            x = to_mpc(x)
            fx, gx = f(x), counterexample_g(x, bits)
            d1 = apply_dw_iterated(f, x, 1, bits)
            d2 = apply_dw_iterated(f, x, 2, bits)
            q = 4 * x + 1
            rhs1 = fx * (1 + 1 / (4 * x)) - gx
            rhs2 = fx * (1 + 2 / q + (4 * x - 1) / (4 * x * q * q)) - gx * (2 + 2 / (q * q))
            first.append(abs(d1 - rhs1) / max(abs(d1), abs(rhs1)))
            second.append(abs(d2 - rhs2) / max(abs(d2), abs(rhs2)))
    return IdentityReport(tuple(points), tuple(first), tuple(second))


# ---------------------------------------------------------------- fits and files


def nu_power_law_fit(samples) -> tuple:
    """Fit nu ~ L r^chi by least squares in log-log coordinates; returns (L, chi)."""
    import math

    pts = [(math.log(float(r)), math.log(float(v))) for r, v in samples if v and v > 0]
    if len(pts) < 5:
        raise PreconditionError("need at least 5 samples with nu >= 1")
    xs, ys = zip(*pts)
    if max(xs) - min(xs) == 0:
        raise PreconditionError("radii must not all coincide")
    slope, intercept = statistics.linear_regression(xs, ys)
    return math.exp(intercept), slope


def parse_equation(obj) -> WilsonDifferenceEquation:
    """Equation from a decoded object {order: n, coeffs: [[...], ...]}."""
    if not isinstance(obj, dict) or "coeffs" not in obj:
        raise SpecParseError("equation must be an object with a 'coeffs' array")
    coeffs = obj["coeffs"]
    if not isinstance(coeffs, list) or not all(isinstance(p, list) for p in coeffs):
        raise SpecParseError("'coeffs' must be an array of arrays")
    try:
        polys = tuple(tuple(Fraction(str(c).strip()) for c in p) for p in coeffs)
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(f"bad coefficient: {exc}") from exc
    order = obj.get("order", len(polys) - 1)
    if order != len(polys) - 1:
        raise SpecParseError(f"order {order} does not match {len(polys)} coefficient polynomials")
    return WilsonDifferenceEquation(polys)


def parse_equation_text(text: str) -> WilsonDifferenceEquation:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, exc.lineno, exc.colno) from exc
    return parse_equation(obj)
