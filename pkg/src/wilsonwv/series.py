"""Wilson series: the basis tau_k, expansion of entire functions and evaluation."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import mpmath
from mpmath import mp, mpc, mpf

from .combinatorics import binomial, pochhammer
from .errors import (
    DegenerateNodeError,
    EvaluationError,
    GrowthGateWarning,
    PreconditionError,
    TruncationError,
)
from .numerics import DEFAULT_BITS, HALF_I, bits_of, max_modulus, sqrt_w, to_mpc
from .operators import FunctionHandle

__all__ = [
    "EntireFunctionSpec",
    "WilsonSeries",
    "WilsonValue",
    "GateReport",
    "ProbeVerdict",
    "expansion_bits",
    "tau_eval",
    "growth_gate",
    "expand_wilson",
    "eval_wilson",
    "dw_of_series",
    "partial_sum_convergence_probe",
    "parse_function_spec",
    "parse_number",
]

I = mpc(0, 1)


def parse_number(v):
    """Decimal string, int or Fraction to Fraction; [re, im] pairs to mpc."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise PreconditionError("booleans are not numbers")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise PreconditionError(f"not a decimal or rational string: {v!r}") from exc
    if isinstance(v, (list, tuple)) and len(v) == 2:
        re, im = parse_number(v[0]), parse_number(v[1])
        if im == 0:
            return re
        return (re, im)
    if isinstance(v, float):
        return Fraction(v)
    raise PreconditionError(f"cannot read a number from {v!r}")


def _mp(v):
    if isinstance(v, Fraction):
        return mpf(v.numerator) / v.denominator
    if isinstance(v, tuple):
        return mpc(_mp(v[0]), _mp(v[1]))
    return mpmath.mpmathify(v)


def _is_zero_point(x0) -> bool:
    return x0 == 0 or (isinstance(x0, tuple) and x0[0] == 0 and x0[1] == 0)


# ---------------------------------------------------------------- built-ins


def _factorial_power_eval(x, gamma, bits):
    # sum x^k / (k!)^gamma, stopped past the peak once terms are negligible
    x = to_mpc(x)
    ax = abs(x)
    peak = float(ax) ** (1.0 / float(gamma)) if ax > 0 else 0.0
    g = _mp(gamma)
    total = mpc(1)
    term = mpc(1)
    biggest = mpf(1)
    eps = mpf(2) ** (-bits - 8)
    k = 0
    while True:
        k += 1
        term = term * x / mpf(k) ** g
        total += term
        at = abs(term)
        if at > biggest:
            biggest = at
        if k > peak + 2 and at <= eps * biggest:
            return total
        if k > 100000:
            raise EvaluationError("factorial_power series did not settle", point=x)


def _gamma_reciprocal_sum_eval(x):
    a = 2 * I * sqrt_w(x)
    return mpmath.rgamma(a) + mpmath.rgamma(-a)


@dataclass(frozen=True)
class EntireFunctionSpec:
    """An entire function named by a kind plus parameters.

    ``kind`` is ``"maclaurin"``, ``"wilson"`` or ``"builtin"``. Use the
    class-method constructors rather than building instances by hand.
    """

    kind: str
    name: str = ""
    coeffs: tuple = ()
    x0: object = Fraction(0)
    params: tuple = ()
    tail_bound: Optional[Fraction] = None

    # constructors ---------------------------------------------------------

    @classmethod
    def polynomial(cls, coeffs: Sequence) -> "EntireFunctionSpec":
        return cls("builtin", "polynomial", tuple(parse_number(c) for c in coeffs))

    @classmethod
    def maclaurin(cls, coeffs: Sequence, tail_bound=None) -> "EntireFunctionSpec":
        tb = None if tail_bound is None else parse_number(tail_bound)
        return cls("maclaurin", "maclaurin", tuple(parse_number(c) for c in coeffs), tail_bound=tb)

    @classmethod
    def wilson(cls, x0, coeffs: Sequence) -> "EntireFunctionSpec":
        return cls("wilson", "wilson", tuple(parse_number(c) for c in coeffs), x0=parse_number(x0))

    @classmethod
    def factorial_power(cls, gamma) -> "EntireFunctionSpec":
        g = parse_number(gamma)
        if isinstance(g, tuple) or g <= 0:
            raise PreconditionError("factorial_power needs a real gamma > 0")
        return cls("builtin", "factorial_power", params=(("gamma", g),))

    @classmethod
    def bessel_eigen_1(cls, lam=1) -> "EntireFunctionSpec":
        return cls("builtin", "bessel_eigen_1", params=(("lambda", parse_number(lam)),))

    @classmethod
    def bessel_eigen_2(cls, lam=1) -> "EntireFunctionSpec":
        return cls("builtin", "bessel_eigen_2", params=(("lambda", parse_number(lam)),))

    @classmethod
    def gamma_reciprocal_sum(cls) -> "EntireFunctionSpec":
        return cls("builtin", "gamma_reciprocal_sum")

    # queries --------------------------------------------------------------

    def param(self, key, default=None):
        return dict(self.params).get(key, default)

    @property
    def label(self) -> str:
        if self.params:
            inner = ",".join(f"{k}={v}" for k, v in self.params)
            return f"{self.name}({inner})"
        return self.name

    def exact_polynomial(self) -> Optional[tuple]:
        """Exact Maclaurin coefficients when the function is a rational polynomial."""
        if self.name in ("polynomial", "maclaurin") and all(isinstance(c, Fraction) for c in self.coeffs):
            return self.coeffs
        return None

    def maclaurin_coeff(self, k: int):
        """b_k as an exact Fraction when available, else an mpmath number."""
        if self.name in ("polynomial", "maclaurin"):
            return self.coeffs[k] if k < len(self.coeffs) else Fraction(0)
        if self.name == "factorial_power":
            g = self.param("gamma")
            if g.denominator == 1:
                return Fraction(1, math.factorial(k) ** int(g))
            return mpmath.factorial(k) ** (-_mp(g))
        raise PreconditionError(f"{self.name} has no Maclaurin coefficients on file")

    def known_order(self) -> Optional[float]:
        if self.name in ("polynomial", "maclaurin"):
            return 0.0
        if self.name == "factorial_power":
            return float(1 / self.param("gamma"))
        if self.name in ("bessel_eigen_1", "bessel_eigen_2", "gamma_reciprocal_sum"):
            return 0.5
        return None

    def evaluate(self, x, prec=None) -> mpc:
        bits = bits_of(prec)
        with mp.workprec(bits + 16):
            x = to_mpc(x)
            if self.name in ("polynomial", "maclaurin"):
                out = mpc(0)
                for c in reversed(self.coeffs):
                    out = out * x + _mp(c)
                return out
            if self.name == "factorial_power":
                return _factorial_power_eval(x, self.param("gamma"), bits)
            if self.name in ("bessel_eigen_1", "bessel_eigen_2"):
                from .difference_equations import bessel_eigenfunction

                family = 1 if self.name == "bessel_eigen_1" else 2
                return bessel_eigenfunction(family, _mp(self.param("lambda")), x, bits)
            if self.name == "gamma_reciprocal_sum":
                return _gamma_reciprocal_sum_eval(x)
            if self.kind == "wilson":
                s = WilsonSeries.from_coeffs(self.x0, self.coeffs, bits)
                return eval_wilson(s, x).value
        raise PreconditionError(f"unknown function kind {self.kind}/{self.name}")

    def handle(self, prec=None) -> FunctionHandle:
        bits = bits_of(prec)
        from .numerics import PrecisionPolicy

        return FunctionHandle(lambda x: self.evaluate(x, bits), self.label, PrecisionPolicy(bits))

    def __call__(self, x):
        return self.evaluate(x)


_BUILTINS = ("polynomial", "factorial_power", "bessel_eigen_1", "bessel_eigen_2", "gamma_reciprocal_sum")


def parse_function_spec(obj: dict) -> EntireFunctionSpec:
    """Build a spec from a decoded JSON object.

    Recognised fields: kind, name, coeffs, x0, gamma, lambda, tail_bound.
    """
    if not isinstance(obj, dict):
        raise PreconditionError("function spec must be a JSON object")
    kind = obj.get("kind")
    if kind in _BUILTINS:
        obj = dict(obj, kind="builtin", name=kind)
        kind = "builtin"
    if kind == "maclaurin":
        return EntireFunctionSpec.maclaurin(obj.get("coeffs", []), obj.get("tail_bound"))
    if kind == "wilson":
        return EntireFunctionSpec.wilson(obj.get("x0", ["0", "0"]), obj.get("coeffs", []))
    if kind == "builtin":
        name = obj.get("name")
        if name == "polynomial":
            return EntireFunctionSpec.polynomial(obj.get("coeffs", []))
        if name == "factorial_power":
            return EntireFunctionSpec.factorial_power(obj.get("gamma", "4"))
        if name == "bessel_eigen_1":
            return EntireFunctionSpec.bessel_eigen_1(obj.get("lambda", "1"))
        if name == "bessel_eigen_2":
            return EntireFunctionSpec.bessel_eigen_2(obj.get("lambda", "1"))
        if name == "gamma_reciprocal_sum":
            return EntireFunctionSpec.gamma_reciprocal_sum()
        raise PreconditionError(f"unknown builtin {name!r}")
    raise PreconditionError(f"unknown function kind {kind!r}")


# ---------------------------------------------------------------- series


def expansion_bits(n_max: int, base: int = DEFAULT_BITS) -> int:
    """Working precision for an expansion to index n_max."""
    n = max(n_max, 2)
    return max(base, 64 + math.ceil(4 * n_max * math.log2(n)))


@dataclass(frozen=True)
class WilsonSeries:
    """f = sum a_k tau_k(.; x0), with z0 = sqrt_w(x0) cached.

    ``complete`` marks a finite expansion whose omitted coefficients are all
    zero; ``exact`` holds rational coefficients when they are known exactly.
    """

    x0: mpc
    z0: mpc
    coeffs: tuple
    bits: int = DEFAULT_BITS
    complete: bool = False
    exact: Optional[tuple] = None
    label: str = ""
    caveats: tuple = field(default=())

    @classmethod
    def from_coeffs(cls, x0, coeffs, bits=DEFAULT_BITS, complete=True, z0=None):
        with mp.workprec(bits):
            x0c = to_mpc(_mp(x0) if not isinstance(x0, mpc) else x0)
            z = sqrt_w(x0c) if z0 is None else to_mpc(z0)
            cs = tuple(to_mpc(_mp(c)) for c in coeffs)
            ex = tuple(coeffs) if all(isinstance(c, Fraction) for c in coeffs) else None
        return cls(x0c, z, cs, bits, complete, ex)

    def __len__(self):
        return len(self.coeffs)

    def abs_coeffs(self):
        return [abs(c) for c in self.coeffs]


def tau_eval(k: int, x, x0=0, prec=None, z0=None) -> mpc:
    """tau_k(x; x0) = prod_{j<k} ((z0 + j i)^2 - x)."""
    if k < 0:
        raise PreconditionError("k must be >= 0")
    with mp.workprec(bits_of(prec)):
        x = to_mpc(x)
        z = sqrt_w(_mp(x0) if not isinstance(x0, mpc) else x0) if z0 is None else to_mpc(z0)
        out = mpc(1)
        for j in range(k):
            out *= (z + j * I) ** 2 - x
        return out


class WilsonValue(NamedTuple):
    value: mpc
    tail: mpf


def eval_wilson(s: WilsonSeries, x, tail_tol=None) -> WilsonValue:
    """Partial sum of the series at x with running tau products.

    Infinite series stop once three consecutive terms fall below
    ``tail_tol`` times the running partial-sum scale; if the coefficients run
    out first a TruncationError carries the last term magnitude.
    """
    with mp.workprec(s.bits):
        x = to_mpc(x)
        tol = mpf(2) ** (-(min(s.bits, DEFAULT_BITS) // 2)) if tail_tol is None else mpf(tail_tol)
        total = mpc(0)
        tau = mpc(1)
        scale = mpf(0)
        small = 0
        last = mpf(0)
        for k, a in enumerate(s.coeffs):
            term = a * tau
            total += term
            last = abs(term)
            scale = max(scale, abs(total))
            small = small + 1 if last <= tol * scale else 0
            if small >= 3 and not s.complete:
                return WilsonValue(total, last)
            tau *= (s.z0 + k * I) ** 2 - x
        if s.complete:
            return WilsonValue(total, mpf(0))
        raise TruncationError(f"series not converged at {x} within {len(s.coeffs)} terms", last_term=last)


def _exact_coeffs_at_zero(poly: tuple, n_max: int) -> list:
    # a_n = (1/n!) sum_j (-1)^(n-j) C(n,j) f(-j^2) / ((j)_j (2j+1)_(n-j))
    vals = []
    for j in range(n_max + 1):
        x = Fraction(-j * j)
        v = Fraction(0)
        for c in reversed(poly):
            v = v * x + c
        vals.append(v)
    out = []
    for n in range(n_max + 1):
        total = Fraction(0)
        for j in range(n + 1):
            w = pochhammer(j, j) * pochhammer(2 * j + 1, n - j)
            total += (-1) ** (n - j) * binomial(n, j) * vals[j] / w
        out.append(total / math.factorial(n))
    return out


def expand_wilson(f, x0=0, n_max: int = 20, prec=None, gate: bool = True) -> WilsonSeries:
    """Coefficients a_0..a_{n_max} of the Wilson series of f about x0.

    Rational polynomials at x0 = 0 are expanded in exact arithmetic. All
    other inputs use the interpolation sum over the nodes x0^{+(2j)} at
    :func:`expansion_bits` precision. The growth gate runs first and only
    warns.
    """
    if n_max < 0:
        raise PreconditionError("n_max must be >= 0")
    if not isinstance(f, EntireFunctionSpec):
        if callable(f):
            f = _CallableSpec(f)
        else:
            raise PreconditionError("expand_wilson needs an EntireFunctionSpec or callable")
    bits = expansion_bits(n_max, bits_of(prec))
    caveats = []
    if f.tail_bound is not None:
        caveats.append(f"maclaurin input truncated, tail bound {f.tail_bound}")
    if gate and f.known_order() not in (0.0,):
        report = growth_gate(f)
        if not report.passed:
            warnings.warn(f"{f.label}: growth gate value {report.value:.4g} exceeds the admissible limit", GrowthGateWarning, stacklevel=2)
            caveats.append("growth gate failed; coefficients may not represent f")

    poly = f.exact_polynomial()
    x0_val = parse_number(x0) if not isinstance(x0, mpc) else x0
    if poly is not None and _is_zero_point(x0_val):
        deg = len(poly) - 1
        ex = _exact_coeffs_at_zero(poly, max(n_max, deg))
        s = WilsonSeries.from_coeffs(0, ex, bits)
        if len(ex) > n_max + 1 and any(ex[n_max + 1:]):
            # caller asked for fewer terms than the degree
            return WilsonSeries(s.x0, s.z0, s.coeffs[: n_max + 1], bits, False, tuple(ex[: n_max + 1]), f.label, tuple(caveats))
        return WilsonSeries(s.x0, s.z0, s.coeffs, bits, True, tuple(ex), f.label, tuple(caveats))

    with mp.workprec(bits):
        x0c = to_mpc(_mp(x0_val)) if not isinstance(x0_val, mpc) else x0_val
        z0 = sqrt_w(x0c)
        w = -2 * z0 * I
        tiny = mpf(2) ** (-(bits // 2))
        vals = [to_mpc(f.evaluate((z0 + j * I) ** 2, bits)) for j in range(n_max + 1)]
        # first[j] = (w + j)_j, second[j] = (w + 2j + 1)_(n - j), updated in n
        first = []
        for j in range(n_max + 1):
            p = mpc(1)
            for t in range(j):
                fac = w + j + t
                if abs(fac) < tiny:
                    raise DegenerateNodeError(f"Pochhammer factor vanishes for x0 = {x0c}")
                p *= fac
            first.append(p)
        second = [mpc(1)] * (n_max + 1)
        coeffs = []
        nfact = mpf(1)
        for n in range(n_max + 1):
            if n > 0:
                nfact *= n
                for j in range(n):
                    fac = w + j + n
                    if abs(fac) < tiny:
                        raise DegenerateNodeError(f"Pochhammer factor vanishes for x0 = {x0c}")
                    second[j] = second[j] * fac
            total = mpc(0)
            for j in range(n + 1):
                term = binomial(n, j) * vals[j] / (first[j] * second[j])
                total += term if (n - j) % 2 == 0 else -term
            coeffs.append(total / nfact)
    return WilsonSeries(x0c, z0, tuple(coeffs), bits, False, None, f.label, tuple(caveats))


class _CallableSpec:
    """Adapter so a bare callable can be expanded."""

    tail_bound = None

    def __init__(self, fn):
        self.fn = fn
        self.label = getattr(fn, "__name__", "f")

    def known_order(self):
        return None

    def exact_polynomial(self):
        return None

    def evaluate(self, x, prec=None):
        with mp.workprec(bits_of(prec)):
            return to_mpc(self.fn(x))


def dw_of_series(s: WilsonSeries) -> WilsonSeries:
    """Series of D_W f about x0^+ with coefficients a'_{k-1} = -k a_k."""
    with mp.workprec(s.bits):
        z1 = s.z0 + HALF_I
        coeffs = tuple(-k * s.coeffs[k] for k in range(1, len(s.coeffs)))
        exact = None
        if s.exact is not None:
            exact = tuple(-k * s.exact[k] for k in range(1, len(s.exact)))
        if not coeffs:
            coeffs, exact = (mpc(0),), (Fraction(0),) if s.exact is not None else None
        return WilsonSeries(z1 * z1, z1, coeffs, s.bits, s.complete, exact, f"D_W {s.label}".strip(), s.caveats)


# ---------------------------------------------------------------- growth gate


@dataclass(frozen=True)
class GateReport:
    """ln M(r)/sqrt(r) on a radius grid against the limit 2 ln 2."""

    samples: tuple
    value: float
    threshold: float
    margin: float
    passed: bool
    note: str = "advisory: a finite grid cannot certify a limsup"


GATE_LIMIT = 2 * math.log(2)


def growth_gate(f, radii=None, margin: float = 0.1, samples: int = 128, prec: int = 64) -> GateReport:
    """Advisory check of limsup ln+ M(r)/sqrt(r) < 2 ln 2.

    Reports the running max over the top decade of the grid and passes when
    it stays below (1 - margin) * 2 ln 2.
    """
    if radii is None:
        radii = [10.0 ** e for e in (3, 3.5, 4, 4.5, 5, 5.5, 6)]
    radii = [float(r) for r in radii]
    if not radii or any(r < 1 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise PreconditionError("radii must be increasing and >= 1")
    if hasattr(f, "evaluate"):
        fn = lambda x: f.evaluate(x, prec)  # noqa: E731
    else:
        fn = f
    rows = []
    for r in radii:
        m = max_modulus(fn, r, samples=samples, prec=prec).value
        lnm = float(mpmath.log(m)) if m > 1 else 0.0
        rows.append((r, lnm / math.sqrt(r)))
    top = radii[-1] / 10
    value = max(v for r, v in rows if r >= top)
    threshold = GATE_LIMIT * (1 - margin)
    return GateReport(tuple(rows), value, GATE_LIMIT, margin, value < threshold)


# ---------------------------------------------------------------- convergence probe


@dataclass(frozen=True)
class ProbeVerdict:
    verdict: str  # "converges", "diverges" or "inconclusive"
    last_terms: tuple
    partial_sum: mpc


def partial_sum_convergence_probe(coeffs, x0, test_point, prec=None) -> ProbeVerdict:
    """Heuristic Cauchy test on the partial sums at one point.

    A Wilson series converges either nowhere off its nodes or on every
    compact set, so one generic test point decides the question for the
    whole plane, up to the limits of a finite prefix.
    """
    bits = bits_of(prec)
    with mp.workprec(bits):
        x0c = to_mpc(_mp(parse_number(x0))) if not isinstance(x0, mpc) else x0
        z0 = sqrt_w(x0c)
        x = to_mpc(test_point)
        for j in range(len(coeffs)):
            if abs((z0 + j * I) ** 2 - x) == 0:
                raise PreconditionError("test point lies on an interpolation node")
        terms = []
        tau = mpc(1)
        total = mpc(0)
        for k, a in enumerate(coeffs):
            a = to_mpc(_mp(parse_number(a)) if isinstance(a, (str, Fraction, int)) else a)
            t = a * tau
            total += t
            terms.append(abs(t))
            tau *= (z0 + k * I) ** 2 - x
        tail = terms[-min(5, len(terms)):]
        scale = max(abs(total), mpf(2) ** (-bits))
        if all(t == 0 for t in tail) or max(tail) <= mpf(2) ** (-(bits // 2)) * scale:
            verdict = "converges"
        elif len(terms) >= 6 and all(b > a for a, b in zip(tail, tail[1:])) and tail[-1] > scale * mpf(2) ** (-(bits // 2)):
            verdict = "diverges"
        else:
            verdict = "inconclusive"
        return ProbeVerdict(verdict, tuple(tail), total)
