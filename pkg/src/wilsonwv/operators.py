"""The Wilson divided-difference operator D_W and the averaging operator A_W.

Every composite of D_W and A_W is evaluated on the lattice of roots
``s_m = z + m*i/2`` with ``z = sqrt_w(x)``. Both operators are independent of
the branch of the square root, so the value of a word of operators at the
point with root ``s_m`` only needs the values at ``s_{m+1}`` and ``s_{m-1}``:

    D: (F(m+1) - F(m-1)) / (2 i s_m)
    A: (F(m+1) + F(m-1)) / 2

An operator word of length n therefore touches at most 2n+1 function values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath
from mpmath import mp, mpc, mpf

from .combinatorics import binomial, leibniz_c
from .errors import DegenerateNodeError, EvaluationError, PreconditionError
from .numerics import HALF_I, PrecisionPolicy, bits_of, sqrt_w, to_mpc

__all__ = [
    "FunctionHandle",
    "as_handle",
    "apply_word",
    "apply_aw",
    "apply_dw",
    "apply_dw_iterated",
    "cooper_dw_n",
    "leibniz_dw_n",
    "quotient_dw",
    "commutator_residual",
]


@dataclass(frozen=True)
class FunctionHandle:
    """A deterministic complex function with a label and a precision hint."""

    eval: Callable
    label: str = "f"
    precision: PrecisionPolicy = field(default_factory=PrecisionPolicy)

    def __call__(self, x):
        return self.eval(x)


def as_handle(f) -> FunctionHandle:
    if isinstance(f, FunctionHandle):
        return f
    if callable(f):
        return FunctionHandle(f, getattr(f, "__name__", "f"))
    raise PreconditionError("expected a callable or FunctionHandle")


def _resolve_bits(f, prec):
    if prec is not None:
        return bits_of(prec)
    if isinstance(f, FunctionHandle):
        return f.precision.bits
    return bits_of(None)


def _to_mp(v):
    if isinstance(v, Fraction):
        return mpf(v.numerator) / v.denominator
    return v


class _Lattice:
    """Per-call memo of f on the nodes (z + m i/2)^2."""

    def __init__(self, f, z, bits, x=None):
        self.f = f
        self.z = z
        self.x = x
        self.tiny = mpf(2) ** (-(bits // 2))
        self.values = {}
        self.memo = {}

    def root(self, m):
        return self.z + m * HALF_I

    def f_at(self, m):
        v = self.values.get(m)
        if v is None:
            x = self.x if m == 0 and self.x is not None else self.root(m) ** 2
            v = to_mpc(self.f(x))
            if not (mpmath.isfinite(v.real) and mpmath.isfinite(v.imag)):
                raise EvaluationError(f"non-finite value at {x}", point=x)
            self.values[m] = v
        return v

    def word(self, word: str, m: int = 0):
        key = (word, m)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if not word:
            out = self.f_at(m)
        else:
            up = self.word(word[1:], m + 1)
            down = self.word(word[1:], m - 1)
            if word[0] == "A":
                out = (up + down) / 2
            else:
                s = self.root(m)
                if abs(s) < self.tiny:
                    raise DegenerateNodeError(f"lattice root {s} collapses the divided difference")
                out = (up - down) / (2 * mpc(0, 1) * s)
        self.memo[key] = out
        return out


def apply_word(f, x, word: str, prec=None, root=None) -> mpc:
    """Apply a word over {'A', 'D'} to f and evaluate at x.

    The leftmost letter is applied last, so ``"AD"`` means A_W(D_W f).
    ``root`` overrides sqrt_w(x) and must square to x; either root gives the
    same value.
    """
    if any(c not in "AD" for c in word):
        raise PreconditionError(f"operator word must use only 'A' and 'D', got {word!r}")
    f = as_handle(f)
    bits = _resolve_bits(f, prec)
    with mp.workprec(bits):
        x = to_mpc(x)
        z = sqrt_w(x) if root is None else to_mpc(root)
        return _Lattice(f, z, bits, x).word(word)


def apply_aw(f, x, prec=None, root=None) -> mpc:
    """(A_W f)(x) = (f(x+) + f(x-))/2."""
    return apply_word(f, x, "A", prec, root)


def _origin_derivative(f, bits):
    # f'(-1/4) by a five-point central stencil
    h = mpf(2) ** (-(bits // 3))
    c = mpf(-0.25)
    vals = [to_mpc(f(c + k * h)) for k in (-2, -1, 1, 2)]
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


def apply_dw(f, x, prec=None, root=None) -> mpc:
    """(D_W f)(x) = (f(x+) - f(x-))/(x+ - x-).

    For |x| < 2^(-bits/2) the quotient has no digits left and the limit
    f'(-1/4) is returned instead.
    """
    f = as_handle(f)
    bits = _resolve_bits(f, prec)
    with mp.workprec(bits):
        x = to_mpc(x)
        if abs(x) < mpf(2) ** (-(bits // 2)):
            return _origin_derivative(f, bits + 32)
    return apply_word(f, x, "D", bits, root)


def apply_dw_iterated(f, x, n: int, prec=None, root=None) -> mpc:
    """D_W applied n times, evaluated at x from the 2n+1 lattice values."""
    if n < 0:
        raise PreconditionError("n must be >= 0")
    return apply_word(f, x, "D" * n, prec, root)


def cooper_dw_n(f, x0, n: int, prec=None) -> mpc:
    """D_W^n f at x0 from the single interpolation sum over nodes x0^{+(2j-n)}.

    Raises DegenerateNodeError when a Pochhammer factor in a weight is below
    2^(-bits/2); callers can fall back to :func:`apply_dw_iterated`.
    """
    if n < 0:
        raise PreconditionError("n must be >= 0")
    f = as_handle(f)
    bits = _resolve_bits(f, prec)
    with mp.workprec(bits):
        x0 = to_mpc(x0)
        z0 = sqrt_w(x0)
        w = 2 * z0 * mpc(0, 1)
        tiny = mpf(2) ** (-(bits // 2))
        total = mpc(0)
        for j in range(n + 1):
            denom = mpc(1)
            for t in range(j):
                factor = -w - n + j + t
                if abs(factor) < tiny:
                    raise DegenerateNodeError(f"vanishing Pochhammer factor at j={j}")
                denom *= factor
            for t in range(n - j):
                factor = w - j + t
                if abs(factor) < tiny:
                    raise DegenerateNodeError(f"vanishing Pochhammer factor at j={j}")
                denom *= factor
            val = to_mpc(f((z0 + (2 * j - n) * HALF_I) ** 2))
            total += binomial(n, j) * val / denom
        return (-1) ** n * total


def leibniz_dw_n(f, g, x, n: int, prec=None) -> mpc:
    """Right-hand side of the Wilson-Leibniz rule for D_W^n(f g) at x."""
    if n < 0:
        raise PreconditionError("n must be >= 0")
    f, g = as_handle(f), as_handle(g)
    bits = _resolve_bits(f, prec)
    with mp.workprec(bits):
        x = to_mpc(x)
        z = sqrt_w(x)
        lf, lg = _Lattice(f, z, bits), _Lattice(g, z, bits)
        total = mpc(0)
        for k in range(n + 1):
            c = leibniz_c(n, k)
            if c == 0:
                continue
            inner = mpc(0)
            for j in range(n - k + 1):
                left = lf.word("A" * (n - k - j) + "D" * (j + k))
                right = lg.word("A" * j + "D" * (n - j))
                inner += binomial(n - k, j) * left * right
            total += _to_mp(c) * inner
        return total


def quotient_dw(f, g, x, prec=None) -> mpc:
    """D_W(f/g)(x) by the quotient rule."""
    f, g = as_handle(f), as_handle(g)
    bits = _resolve_bits(f, prec)
    with mp.workprec(bits):
        x = to_mpc(x)
        z = sqrt_w(x)
        lf, lg = _Lattice(f, z, bits), _Lattice(g, z, bits)
        gp, gm = lg.f_at(1), lg.f_at(-1)
        if gp == 0 or gm == 0:
            raise EvaluationError("denominator vanishes at a shifted node", point=x)
        return (lf.word("D") * lg.word("A") - lf.word("A") * lg.word("D")) / (gp * gm)


def commutator_residual(f, x, prec=None) -> mpc:
    """(A_W D_W f - D_W A_W f - D_W^2 f / 2)(x), which vanishes identically."""
    f = as_handle(f)
    bits = _resolve_bits(f, prec)
    with mp.workprec(bits):
        lat = _Lattice(f, sqrt_w(to_mpc(x)), bits)
        return lat.word("AD") - lat.word("DA") - lat.word("DD") / 2
