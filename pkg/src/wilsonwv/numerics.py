"""Branch-correct complex arithmetic on the Wilson node lattice.

Complex numbers are :class:`mpmath.mpc` values. Every analytic routine takes a
``prec`` argument (binary digits); ``None`` means :data:`DEFAULT_BITS`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import mpmath
from mpmath import mp, mpc, mpf

from .errors import EvaluationError, PoleError, PreconditionError

DEFAULT_BITS = 128
HALF_I = mpc(0, 0.5)


@dataclass(frozen=True)
class PrecisionPolicy:
    bits: int = DEFAULT_BITS

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < 53:
            raise PreconditionError(f"precision must be an integer >= 53 bits, got {self.bits}")


def bits_of(prec) -> int:
    """Resolve a precision argument (int, PrecisionPolicy or None) to bits."""
    if prec is None:
        return DEFAULT_BITS
    if isinstance(prec, PrecisionPolicy):
        return prec.bits
    return PrecisionPolicy(int(prec)).bits


def to_mpc(x) -> mpc:
    if isinstance(x, mpc):
        return x
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return mpc(mpmath.mpmathify(x[0]), mpmath.mpmathify(x[1]))
    return mpc(mpmath.mpmathify(x))


def sqrt_w(x) -> mpc:
    """Square root with argument in (-pi/2, pi/2].

    Negative reals map to the positive imaginary axis, so sqrt_w(-1) = i.
    """
    x = to_mpc(x)
    if x.imag == 0 and x.real < 0:
        return mpc(0, mpmath.sqrt(-x.real))
    return mpmath.sqrt(x)


def node(x, m: int) -> mpc:
    """Lattice point x^{+(m)} = (sqrt_w(x) + m*i/2)**2 (closed form, no recursion)."""
    if m == 0:
        return to_mpc(x)
    z = sqrt_w(x)
    return (z + m * HALF_I) ** 2


def node_from_root(z, m: int) -> mpc:
    return (z + m * HALF_I) ** 2


def log_gamma(z, prec=None) -> mpc:
    """Principal branch of log Gamma(z)."""
    with mp.workprec(bits_of(prec)):
        z = to_mpc(z)
        if z.imag == 0 and z.real <= 0 and z.real == mpmath.floor(z.real):
            raise PoleError(f"log_gamma has a pole at {z.real}")
        return mpc(mpmath.loggamma(z))


def reciprocal_gamma(z, prec=None) -> mpc:
    """1/Gamma(z); zero at the non-positive integers."""
    with mp.workprec(bits_of(prec)):
        z = to_mpc(z)
        return mpc(mpmath.rgamma(z))


def _clog1p(w: complex) -> complex:
    return complex(0.5 * math.log1p(2 * w.real + abs(w) ** 2), math.atan2(w.imag, 1 + w.real))


def _log_gauss_product(z: complex, n: int) -> complex:
    # log of n! n^z / (z (z+1) ... (z+n)), Kahan-compensated in double precision
    acc = -cmath.log(z)
    comp = 0j
    for k in range(1, n + 1):
        y = (z * math.log1p(1.0 / k) - _clog1p(z / k)) - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    # sum_k z*log(1+1/k) telescopes to z*log(n+1); shift to the n^z form
    return acc - z * (math.log1p(1.0 / n))


def gamma_product_oracle(z, n: int = 10**6) -> complex:
    """Gamma(z) from the Gauss product, Richardson-extrapolated in 1/n.

    Pure double precision and independent of :func:`log_gamma`. The raw product
    has relative error (z - z**2)/(2n) + O(1/n**2); combining n, n/2 and n/4
    removes both orders.
    """
    z = complex(z)
    quarter = _log_gauss_product(z, n // 4)
    half = _log_gauss_product(z, n // 2)
    full = _log_gauss_product(z, n)
    return cmath.exp((8 * full - 6 * half + quarter) / 3)


def _finite(v) -> bool:
    return mpmath.isfinite(v.real) and mpmath.isfinite(v.imag)


@dataclass(frozen=True)
class MaxModulus:
    value: mpf
    point: mpc


def max_modulus(f: Callable, r, samples: int = 1024, prec=None) -> MaxModulus:
    """Estimate M(r; f) = max |f| on the circle |x| = r.

    Samples equally spaced points (the first at angle 0) and refines the best
    arc once by golden-section search.
    """
    if samples < 8:
        raise PreconditionError("max_modulus needs at least 8 samples")
    bits = bits_of(prec)
    with mp.workprec(bits):
        r = mpf(r)
        if r <= 0:
            raise PreconditionError("radius must be positive")

        def modulus(theta):
            x = mpmath.mpc(r * mpmath.cos(theta), r * mpmath.sin(theta))
            v = to_mpc(f(x))
            if not _finite(v):
                raise EvaluationError(f"non-finite value at {x}", point=x)
            return abs(v), x

        step = 2 * mpmath.pi / samples
        best = (mpf(-1), None, mpf(0))
        for k in range(samples):
            theta = k * step
            val, x = modulus(theta)
            if val > best[0]:
                best = (val, x, theta)

        lo, hi = best[2] - step, best[2] + step
        invphi = (mpmath.sqrt(5) - 1) / 2
        a = hi - invphi * (hi - lo)
        b = lo + invphi * (hi - lo)
        fa, fb = modulus(a), modulus(b)
        for _ in range(max(20, int(math.log2(samples)) + 10)):
            if fa[0] > fb[0]:
                hi, b, fb = b, a, fa
                a = hi - invphi * (hi - lo)
                fa = modulus(a)
            else:
                lo, a, fa = a, b, fb
                b = lo + invphi * (hi - lo)
                fb = modulus(b)
        for cand in (fa, fb):
            if cand[0] > best[0]:
                best = (cand[0], cand[1], None)
        return MaxModulus(best[0], best[1])
