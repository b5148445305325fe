"""Exact combinatorics for the Wilson calculus.

Everything here is exact: ``int`` and :class:`fractions.Fraction`. Complex
Pochhammer symbols are the one exception and are evaluated at the caller's
mpmath precision.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import mpmath

from .errors import PreconditionError

__all__ = [
    "binomial",
    "pochhammer",
    "leibniz_c",
    "leibniz_c_recurrence",
    "leibniz_c_sum_recurrence",
    "leibniz_c_table",
    "central_factorial_t",
    "central_factorial_t_closed",
    "t_growth_bound_check",
    "tau_poly_coeffs",
    "maclaurin_to_wilson_matrix",
    "wilson_to_maclaurin_matrix",
    "matmul",
    "apply_matrix",
    "bessel_polynomial",
]


def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def pochhammer(a, k: int):
    """Rising factorial (a)_k = a (a+1) ... (a+k-1).

    Exact for int/Fraction input, otherwise an mpmath value at the ambient
    precision.
    """
    if k < 0:
        raise PreconditionError("pochhammer needs k >= 0")
    if isinstance(a, (int, Fraction)):
        out = Fraction(1) if isinstance(a, Fraction) else 1
        for j in range(k):
            out *= a + j
        return out
    a = mpmath.mpmathify(a)
    out = mpmath.mpf(1)
    for j in range(k):
        out *= a + j
    return out


def _check_nk(n, k):
    if not (0 <= k <= n):
        raise PreconditionError(f"need 0 <= k <= n, got n={n}, k={k}")


def leibniz_c(n: int, k: int) -> Fraction:
    """C(n, k) = (-1/4)^k (n-1+k)! / ((n-1-k)! k!), closed form.

    With (-1)!/(-1)! = 1 and 1/(-1)! = 0 this gives C(0,0) = 1 and C(n,n) = 0.
    """
    _check_nk(n, k)
    if n - 1 - k < 0:
        return Fraction(1) if n == k == 0 else Fraction(0)
    return Fraction(-1, 4) ** k * Fraction(factorial(n - 1 + k), factorial(n - 1 - k) * factorial(k))


@lru_cache(maxsize=None)
def _c3_row(n: int) -> tuple:
    if n == 0:
        return (Fraction(1),)
    prev = _c3_row(n - 1)
    row = [Fraction(1)]
    for k in range(1, n):
        row.append(prev[k] - Fraction(n + k - 2, 2) * prev[k - 1])
    row.append(Fraction(0))
    return tuple(row)


def leibniz_c_recurrence(n: int, k: int) -> Fraction:
    """C(n, k) from C(n,k) = C(n-1,k) - (n+k-2)/2 C(n-1,k-1)."""
    _check_nk(n, k)
    return _c3_row(n)[k]


@lru_cache(maxsize=None)
def _csum_row(n: int) -> tuple:
    if n == 0:
        return (Fraction(1),)
    prev = _csum_row(n - 1)
    row = [Fraction(1)]
    for k in range(1, n):
        total = Fraction(0)
        for j in range(k + 1):
            # (n-1-j)!/(n-1-k)! = (n-k)_(k-j)
            total += Fraction(-1, 2) ** (k - j) * pochhammer(n - k, k - j) * prev[j]
        row.append(total)
    row.append(Fraction(0))
    return tuple(row)


def leibniz_c_sum_recurrence(n: int, k: int) -> Fraction:
    """C(n, k) from the full-row recurrence over C(n-1, 0..k)."""
    _check_nk(n, k)
    return _csum_row(n)[k]


def leibniz_c_table(n_max: int) -> list[list[Fraction]]:
    """Rows 0..n_max of C(n, k) built by the three-term recurrence."""
    if n_max < 0:
        raise PreconditionError("n_max must be >= 0")
    return [list(_c3_row(n)) for n in range(n_max + 1)]


@lru_cache(maxsize=None)
def _t_row(k: int) -> tuple:
    # row k of T(k, n), n = 0..k
    if k == 0:
        return (1,)
    prev = _t_row(k - 1)
    row = [0]
    for n in range(1, k + 1):
        left = prev[n - 1]
        right = prev[n] if n <= k - 1 else 0
        row.append(left + n * n * right)
    return tuple(row)


def central_factorial_t(k: int, n: int) -> int:
    """Central factorial number T(k, n) via T(k,n) = T(k-1,n-1) + n^2 T(k-1,n)."""
    if k < 0 or n < 0:
        raise PreconditionError("T(k, n) needs k, n >= 0")
    if n > k:
        return 0
    return _t_row(k)[n]


def central_factorial_t_closed(k: int, n: int) -> Fraction:
    """T(k, n) from the alternating sum over j = 1..n, in exact rationals."""
    if k < 0 or n < 0:
        raise PreconditionError("T(k, n) needs k, n >= 0")
    if n == 0:
        return Fraction(1 if k == 0 else 0)
    if k == 0:
        return Fraction(0)
    total = Fraction(0)
    for j in range(1, n + 1):
        total += Fraction(2 * (-1) ** (n + j) * j ** (2 * k), factorial(n - j) * factorial(n + j))
    return total


def t_growth_bound_check(k: int, n: int, K: float = 2.0) -> bool:
    """Whether T(k, n) <= K e^{2n} n^{2k-2n}.

    K = 2 is an empirical constant: the existence proof gives no value.
    """
    if k < 1 or n < 1:
        raise PreconditionError("bound is stated for k, n >= 1")
    t = central_factorial_t(k, n)
    if t == 0:
        return True
    with mpmath.workprec(64):
        lhs = mpmath.log(t)
        rhs = mpmath.log(K) + 2 * n + (2 * k - 2 * n) * mpmath.log(n)
        return bool(lhs <= rhs)


@lru_cache(maxsize=None)
def tau_poly_coeffs(k: int) -> tuple:
    """Ascending coefficients of prod_{j<k} (x + j^2) = (-1)^k tau_k(x; 0)."""
    if k < 0:
        raise PreconditionError("k must be >= 0")
    if k == 0:
        return (1,)
    prev = tau_poly_coeffs(k - 1)
    c = (k - 1) ** 2
    out = [0] * (k + 1)
    for i, p in enumerate(prev):
        out[i] += c * p
        out[i + 1] += p
    return tuple(out)


def maclaurin_to_wilson_matrix(K: int) -> list[list[int]]:
    """Upper-triangular matrix with entry (n, k) = (-1)^k T(k, n).

    Acting on Maclaurin coefficients b_0..b_K it returns Wilson coefficients
    a_0..a_K at base point 0.
    """
    if K < 0:
        raise PreconditionError("K must be >= 0")
    return [[(-1) ** k * central_factorial_t(k, n) for k in range(K + 1)] for n in range(K + 1)]


def wilson_to_maclaurin_matrix(K: int) -> list[list[int]]:
    """Entry (m, k) = (-1)^k [x^m] prod_{j<k}(x + j^2); inverse of the forward matrix."""
    if K < 0:
        raise PreconditionError("K must be >= 0")
    out = [[0] * (K + 1) for _ in range(K + 1)]
    for k in range(K + 1):
        sign = (-1) ** k
        for m, c in enumerate(tau_poly_coeffs(k)):
            out[m][k] = sign * c
    return out


def matmul(A, B):
    return [[sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def apply_matrix(A, v):
    return [sum(row[j] * v[j] for j in range(len(v))) for row in A]


def bessel_polynomial(n: int) -> tuple:
    """Ascending integer coefficients of the Bessel polynomial y_n.

    Built from y_n = (2n-1) x y_{n-1} + y_{n-2}, y_0 = 1, y_1 = 1 + x.
    """
    if n < 0:
        raise PreconditionError("n must be >= 0")
    y0, y1 = (1,), (1, 1)
    if n == 0:
        return y0
    for m in range(2, n + 1):
        nxt = [0] * (m + 1)
        for i, c in enumerate(y1):
            nxt[i + 1] += (2 * m - 1) * c
        for i, c in enumerate(y0):
            nxt[i] += c
        y0, y1 = y1, tuple(nxt)
    return y1
