"""Maximal term, central index and Wiman-Valiron type checks for Wilson series.

All series here are expanded about x0 = 0, where on the positive axis
|tau_n(r; 0)| = r (r + 1^2) ... (r + (n-1)^2).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np
from mpmath import mp, mpf

from .errors import DegenerateNodeError, PreconditionError, TruncationError
from .numerics import DEFAULT_BITS, bits_of, max_modulus, to_mpc
from .operators import apply_dw_iterated, cooper_dw_n
from .series import WilsonSeries

__all__ = [
    "MuNuResult",
    "mu_nu",
    "order_from_coeffs",
    "order_from_nu",
    "ComparisonSchedule",
    "ScheduleCheck",
    "make_schedule",
    "check_schedule",
    "epsilon_nn",
    "is_tau_normal",
    "ScanResult",
    "flagged_log_measure",
    "exceptional_scan",
    "b_of_n",
    "kappa_tail",
    "kappa_main",
    "WVReport",
    "tail_check",
    "wv_main_check",
    "wv_estimate_check",
    "kn_bound",
    "lemma_gg_check",
    "mbound_check",
    "wv_precision",
    "certified_mu_nu",
    "required_scan",
]

MIN_N = 16


def _positive_terms(s: WilsonSeries, r, count: int):
    # |a_n| r (r + 1) ... (r + (n-1)^2) for n < count
    out = []
    prod = mpf(1)
    for n in range(count):
        out.append(abs(s.coeffs[n]) * prod)
        prod *= r + n * n
    return out


@dataclass(frozen=True)
class MuNuResult:
    r: mpf
    mu: mpf
    nu: int
    scan_limit: int
    term_values: tuple

    def term(self, n: int) -> mpf:
        return self.term_values[n]


def mu_nu(s: WilsonSeries, r, prec=None, min_limit: int = 0) -> MuNuResult:
    """Maximal term mu_W(r) and largest maximizing index nu_W(r).

    Terms are consumed until ten consecutive ones are decreasing and below
    mu * 2^(-bits/4), and the index passes ``min_limit``. Running out of
    coefficients first raises TruncationError unless the series is complete.
    """
    if not _is_origin(s):
        raise PreconditionError("mu_nu needs a series about x0 = 0")
    bits = bits_of(prec)
    with mp.workprec(bits):
        r = mpf(r)
        if r <= 0:
            raise PreconditionError("r must be positive")
        cut = mpf(2) ** (-(bits // 4))
        terms = []
        mu = mpf(-1)
        prod = mpf(1)
        run = 0
        limit = None
        for n, a in enumerate(s.coeffs):
            t = abs(a) * prod
            prod *= r + n * n
            terms.append(t)
            if t > mu:
                mu = t
            if n > 0 and t < terms[-2] and t < mu * cut:
                run += 1
            else:
                run = 0
            if run >= 10 and n >= min_limit:
                limit = n
                break
        if limit is None:
            if not s.complete:
                raise TruncationError(f"cannot certify the maximal term at r = {r} with {len(s.coeffs)} coefficients", last_term=terms[-1] if terms else None)
            limit = len(terms) - 1
        tol = mu * mpf(2) ** (8 - bits)
        nu = max(n for n, t in enumerate(terms) if t >= mu - tol)
        return MuNuResult(r, mu, nu, limit, tuple(terms))


def _is_origin(s: WilsonSeries) -> bool:
    return s.x0 == 0


def order_from_coeffs(s: WilsonSeries) -> float:
    """Running max of n ln n / (-ln|a_n|) over the top half of the indices.

    A finite prefix only estimates the limsup; convergence in n is slow.
    """
    nz = [n for n, a in enumerate(s.coeffs) if a != 0]
    if s.complete:
        return 0.0
    if len(nz) < 20:
        raise PreconditionError("need at least 20 nonzero coefficients")
    top = len(s.coeffs) - 1
    best = -math.inf
    with mp.workprec(64):
        for n in range(max(2, top // 2), top + 1):
            a = abs(s.coeffs[n])
            if a == 0:
                continue
            la = -mpmath.log(a)
            if la <= 0:
                continue
            best = max(best, float(n * math.log(n) / la))
    if best == -math.inf:
        raise PreconditionError("no usable coefficients in the top half")
    return best


def order_from_nu(samples: Sequence) -> float:
    """Least-squares slope of ln+ nu against ln r over the top two decades."""
    pts = sorted((float(r), int(v)) for r, v in samples)
    if len(pts) < 5:
        raise PreconditionError("need at least 5 (r, nu) samples")
    if pts[0][0] <= 0 or math.log10(pts[-1][0] / pts[0][0]) < 3 - 1e-9:
        raise PreconditionError("samples must span at least three decades")
    lo = pts[-1][0] / 100
    sel = [(math.log(r), math.log(v) if v > 1 else 0.0) for r, v in pts if r >= lo * (1 - 1e-12)]
    xs = np.array([p[0] for p in sel])
    ys = np.array([p[1] for p in sel])
    if len(sel) < 2 or np.ptp(xs) == 0:
        raise PreconditionError("not enough samples in the top two decades")
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)


# ---------------------------------------------------------------- comparison schedule


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = (_GL_X + 1) / 2
_GL_W = _GL_W / 2


# beyond this ln t0 the slope s0/t0 has no representable exponent
_LOG_T0_MAX = mpf(2) ** 64


@dataclass(frozen=True)
class ComparisonSchedule:
    """alpha is linear on [0, t0] with slope alpha'(t0) and follows
    alpha'(t) = -1/(t ln t (ln ln t)^(1+delta)) beyond t0.

    t0 may be astronomically large, so it is kept as ln t0. On [0, t0]
    alpha(t) = -s0 - slope t, which never needs t0 itself.
    """

    delta: float
    log_t0: mpf
    s0: mpf
    a_inf: mpf

    @property
    def t0(self) -> mpf:
        """t0, or inf when ln t0 exceeds 2^64."""
        return mpmath.exp(self.log_t0) if self.log_t0 <= _LOG_T0_MAX else mpmath.inf

    @property
    def log_slope(self) -> mpf:
        return mpmath.log(self.s0) - self.log_t0

    @property
    def slope(self) -> mpf:
        """|alpha'| on [0, t0], equal to s0 / t0; 0 when it underflows every exponent."""
        return mpmath.exp(self.log_slope) if self.log_t0 <= _LOG_T0_MAX else mpf(0)

    @property
    def alpha_t0(self) -> mpf:
        return -2 * self.s0

    @property
    def alpha_inf(self) -> mpf:
        return -2 * self.s0 - self.a_inf

    def _float_t0(self):
        return math.exp(float(self.log_t0)) if self.log_t0 < 700 else math.inf

    def _below_t0(self, t) -> bool:
        return t <= 0 or mpmath.log(t) <= self.log_t0

    def _F(self, t):
        return mpmath.log(mpmath.log(t)) ** (-self.delta) / self.delta

    def _F0(self):
        return mpmath.log(self.log_t0) ** (-self.delta) / self.delta

    def alpha(self, t) -> mpf:
        t = mpf(t)
        if self._below_t0(t):
            return -self.s0 - self.slope * t
        return -2 * self.s0 - self._F0() + self._F(t)

    def alpha_prime(self, t) -> mpf:
        t = mpf(t)
        if self._below_t0(t):
            return -self.slope
        lt = mpmath.log(t)
        return -1 / (t * lt * mpmath.log(lt) ** (1 + self.delta))

    def rho(self, n) -> mpf:
        return mpmath.exp(-self.alpha(n))

    def log_alpha_n(self, n) -> mpf:
        """ln alpha_n = integral of alpha over [0, n]."""
        n = mpf(n)
        if self._below_t0(n):
            return -self.s0 * n - self.slope * n * n / 2
        base = self.log_alpha_n(self.t0)
        return base + mpmath.quad(self.alpha, mpmath.linspace(self.t0, n, 8))

    def log_ratio(self, N: int, n: int) -> mpf:
        """ln(alpha_n/alpha_N) + (n - N) ln rho_N = integral_N^n (alpha(t) - alpha(N)) dt."""
        if n == N:
            return mpf(0)
        lo, hi = min(n, N), max(n, N)
        if self._below_t0(hi):
            return -self.slope * (n - N) ** 2 / 2
        aN = self.alpha(N)
        pieces = sorted({mpf(lo), mpf(hi)} | ({self.t0} if lo < self.t0 < hi else set()))
        val = mpmath.quad(lambda t: self.alpha(t) - aN, pieces)
        return val if n > N else -val

    # vectorised float evaluation -----------------------------------------

    def _alpha_np(self, t):
        t0 = self._float_t0()
        s0 = float(self.s0)
        m = float(self.slope)
        t = np.asarray(t, dtype=float)
        lin = -s0 - m * t
        with np.errstate(invalid="ignore", divide="ignore"):
            F = np.log(np.log(np.maximum(t, math.e + 1e-9))) ** (-self.delta) / self.delta
            log = -2 * s0 - float(self._F0()) + F
        return np.where(t <= t0, lin, log)


def _excess(u, d):
    # A_inf + 2 s0 - ln 2 as a function of u = ln ln t0; decreasing in u
    return u ** (-d) / d + 2 * mpmath.exp(-u) * u ** (-1 - d) - mpmath.log(2)


def make_schedule(delta: float) -> ComparisonSchedule:
    """Pick t0 from the ladder e^e, 10^2, 10^3, ... with A_inf + 2 s0 <= ln 2.

    The crossing is bracketed in u = ln ln t0 first, so tiny delta (where t0
    has more digits than any float exponent) costs a few hundred steps.
    """
    if not delta > 0:
        raise PreconditionError("delta must be positive")
    with mp.workprec(DEFAULT_BITS):
        d = mpf(delta)
        ln10 = mpmath.log(10)
        if _excess(mpf(1), d) <= 0:
            log_t0 = mpf(1) * mpmath.e
        else:
            lo, hi = mpf(1), mpf(2)
            while _excess(hi, d) > 0:
                lo, hi = hi, 2 * hi
            for _ in range(DEFAULT_BITS + 8):
                mid = (lo + hi) / 2
                if _excess(mid, d) > 0:
                    lo = mid
                else:
                    hi = mid
            k = max(mpf(2), mpmath.ceil(mpmath.exp(hi) / ln10))
            step = mpf(2) ** (8 - DEFAULT_BITS)
            # rounding can leave k a hair short; grow the correction geometrically
            while _excess(mpmath.log(k * ln10), d) > 0:
                k = max(k + 1, mpmath.ceil(k * (1 + step)))
                step *= 2
            # step back while the previous rung still qualifies
            while k > 2 and k < 2 ** 64 and _excess(mpmath.log((k - 1) * ln10), d) <= 0:
                k -= 1
            log_t0 = k * ln10
        llt = mpmath.log(log_t0)
        return ComparisonSchedule(float(delta), log_t0, 1 / (log_t0 * llt ** (1 + d)), llt ** (-d) / d)


@dataclass(frozen=True)
class ScheduleCheck:
    n_max: int
    range_ok: bool
    rho_bounds_ok: bool
    rho_monotone_ok: bool
    log_concave_ok: bool
    containment_ok: bool
    limit_ok: bool

    @property
    def ok(self) -> bool:
        return all((self.range_ok, self.rho_bounds_ok, self.rho_monotone_ok, self.log_concave_ok, self.containment_ok, self.limit_ok))


def _linear_interval_values(sched, n_max):
    # alpha(n) and I_n = integral_{n-1}^{n} alpha, closed forms on [0, t0]
    m = sched.slope
    if m > mpf("1e-12"):
        s0, mf = float(sched.s0), float(m)
        n = np.arange(n_max + 2, dtype=float)
        return -s0 - mf * n, -s0 - mf * (n - 0.5), None
    # slope below double resolution: compare in multiprecision
    need = -sched.log_slope / mpmath.log(2)
    return None, None, (64 + int(need) + 64 if need < 2**20 else math.inf)


def _symbolic_linear_check(sched, n_max):
    # on [0, t0] consecutive alpha(n) and I_n differ by exactly -slope < 0, so
    # monotonicity, concavity and containment reduce to slope > 0; the range
    # holds when s0 + slope n_max < ln 2, i.e. when n_max slope < s0 suffices
    ln2 = mpmath.log(2)
    positive = bool(sched.log_slope > -mpmath.inf)
    small = bool(sched.log_slope + mpmath.log(max(n_max, 1)) < mpmath.log(sched.s0) and 2 * sched.s0 < ln2)
    limit_ok = bool(sched.alpha_inf >= -ln2)
    return ScheduleCheck(n_max, small, small and positive, positive, positive, positive, limit_ok)


def check_schedule(sched: ComparisonSchedule, n_max: int = 10**5) -> ScheduleCheck:
    """Check the type invariants of the schedule for n <= n_max.

    Interval integrals I_n are computed per unit interval (never as
    differences of cumulative sums): ln alpha_n is concave exactly when
    I_{n+1} < I_n, and rho_n lies strictly inside its interval exactly when
    I_{n+1} < alpha(n) < I_n. When the slope needs more than 4096 bits the
    linear regime is settled in closed form instead.
    """
    ln2 = math.log(2)
    limit_ok = bool(sched.alpha_inf >= -mpmath.log(2))
    t0 = sched._float_t0()
    if n_max + 1 <= t0:
        a, I, bits = _linear_interval_values(sched, n_max)
        if a is None and bits > 4096:
            return _symbolic_linear_check(sched, n_max)
        if a is None:
            with mp.workprec(bits):
                s0, m = sched.s0, sched.slope
                ok_range = ok_rho = ok_mono = ok_conc = ok_cont = True
                prev_a = None
                for n in range(n_max + 1):
                    an = -s0 - m * n
                    In = -s0 - m * (n - mpf(0.5)) if n >= 1 else None
                    In1 = -s0 - m * (n + mpf(0.5))
                    ok_range &= -mpmath.log(2) <= an <= 0
                    ok_rho &= -mpmath.log(2) < an < 0
                    if prev_a is not None:
                        ok_mono &= an < prev_a
                    if In is not None:
                        ok_conc &= In1 < In
                        ok_cont &= In1 < an < In
                    else:
                        ok_cont &= In1 < an < 0
                    prev_a = an
            return ScheduleCheck(n_max, bool(ok_range), bool(ok_rho), bool(ok_mono), bool(ok_conc), bool(ok_cont), limit_ok)
    else:
        n = np.arange(n_max + 2, dtype=float)
        a = sched._alpha_np(n)
        starts = n - 1
        I = np.empty_like(n)
        I[0] = np.nan
        # unit intervals, split at t0 when it falls inside one
        lo, hi = starts[1:], n[1:]
        cut = np.clip(t0, lo, hi)
        left = sched._alpha_np(lo[:, None] + (cut - lo)[:, None] * _GL_X) @ _GL_W * (cut - lo)
        right = sched._alpha_np(cut[:, None] + (hi - cut)[:, None] * _GL_X) @ _GL_W * (hi - cut)
        I[1:] = left + right
    an = a[: n_max + 1]
    range_ok = bool(np.all((an >= -ln2) & (an <= 0)))
    rho_ok = bool(np.all((an > -ln2) & (an < 0)))
    mono_ok = bool(np.all(np.diff(an) < 0))
    conc_ok = bool(np.all(I[2 : n_max + 2] < I[1 : n_max + 1]))
    cont = (I[2 : n_max + 2] < an[1:]) & (an[1:] < I[1 : n_max + 1])
    cont_ok = bool(np.all(cont) and I[1] < an[0] < 0)
    return ScheduleCheck(n_max, range_ok, rho_ok, mono_ok, conc_ok, cont_ok, limit_ok)


# ---------------------------------------------------------------- normality


def epsilon_nn(n: int, N: int, gamma):
    """sum_{k=n}^{N-1} k^2 / N^gamma, exact when gamma is an integer or Fraction."""
    if not (0 <= n < N):
        raise PreconditionError("need 0 <= n < N")
    squares = (N - 1) * N * (2 * N - 1) // 6 - (n - 1) * n * (2 * n - 1) // 6
    g = Fraction(gamma) if isinstance(gamma, (int, Fraction)) else None
    if g is not None and g.denominator == 1:
        return Fraction(squares, N ** int(g))
    return squares / float(N) ** float(gamma)


def is_tau_normal(s: WilsonSeries, r, gamma, sched: ComparisonSchedule, mn: Optional[MuNuResult] = None, prec=None):
    """(normal, witness) for the candidate N = nu_W(r).

    The witness is the first index violating the comparison inequality, or
    None. A failure means "not normal with N = nu_W", which contains the
    exceptional set.
    """
    bits = bits_of(prec)
    mn = mn or mu_nu(s, r, bits)
    N = mn.nu
    with mp.workprec(bits):
        tN = mn.term(N)
        slack = 1 + mpf(2) ** (-(bits // 2))
        for n in range(mn.scan_limit + 1):
            if n == N:
                continue
            t = mn.term(n)
            if t == 0:
                continue
            bound = tN * mpmath.exp(sched.log_ratio(N, n))
            if n < N:
                eps = epsilon_nn(n, N, gamma)
                bound *= 1 + (mpf(eps.numerator) / eps.denominator if isinstance(eps, Fraction) else mpf(eps))
            if t > bound * slack:
                return False, n
    return True, None


@dataclass(frozen=True)
class ScanResult:
    radii: tuple
    normal: tuple
    flagged: tuple
    log_measure: float


def flagged_log_measure(r_grid: Sequence, flags: Sequence) -> float:
    """Sum of ln-widths of the cells around flagged radii (cells split at log midpoints)."""
    lr = [math.log(float(r)) for r in r_grid]
    if any(b <= a for a, b in zip(lr, lr[1:])):
        raise PreconditionError("grid must be increasing")
    total = 0.0
    for i, flag in enumerate(flags):
        if not flag:
            continue
        left = (lr[i] - lr[i - 1]) / 2 if i > 0 else 0.0
        right = (lr[i + 1] - lr[i]) / 2 if i + 1 < len(lr) else 0.0
        total += left + right
    return total


def exceptional_scan(s: WilsonSeries, r_grid: Sequence, gamma, sched: ComparisonSchedule, prec=None) -> ScanResult:
    normal = []
    for r in r_grid:
        ok, _ = is_tau_normal(s, r, gamma, sched, prec=prec)
        normal.append(ok)
    flagged = tuple(r for r, ok in zip(r_grid, normal) if not ok)
    return ScanResult(tuple(r_grid), tuple(normal), flagged, flagged_log_measure(r_grid, [not ok for ok in normal]))


# ---------------------------------------------------------------- b(N) and kappa


def b_of_n(N: int, delta) -> float:
    """b(N) = 1/(N ln N (ln ln N)^(1+delta)), defined here for N >= 16."""
    if N < MIN_N:
        raise PreconditionError(f"b(N) needs N >= {MIN_N}, got {N}")
    ln = math.log(N)
    return 1.0 / (N * ln * math.log(ln) ** (1 + delta))


def kappa_tail(N: int, beta, delta) -> int:
    b = b_of_n(N, delta)
    return int(math.floor(math.sqrt(beta / b * math.log(1 / b))))


def kappa_main(N: int, delta) -> int:
    if N < MIN_N:
        raise PreconditionError(f"kappa needs N >= {MIN_N}, got {N}")
    ln = math.log(N)
    return int(math.floor(math.sqrt(N * ln * ln * math.log(ln) ** (1 + delta))))


def required_scan(N: int, delta) -> int:
    """Minimum scan index N + 4 kappa_main(N) used by the asymptotic checks."""
    return N + 4 * kappa_main(N, delta) if N >= MIN_N else 0


@dataclass(frozen=True)
class WVReport:
    r: mpf
    nu: int
    kappa: int
    residual: mpf
    bound: mpf
    tau_normal: bool
    details: dict = field(default_factory=dict)

    @property
    def ratio(self) -> mpf:
        return self.residual / self.bound if self.bound else mpmath.inf


def wv_precision(mu, bits: int) -> int:
    """Bits for evaluating f on |x| = r: cancellation can cost log2(mu)."""
    return bits + max(0, int(mpmath.log(mu, 2))) + 32


def certified_mu_nu(s, r, delta, bits):
    """mu_nu scanned at least to N + 4 kappa_main(N)."""
    mn = mu_nu(s, r, bits)
    need = required_scan(mn.nu, delta)
    if mn.scan_limit < need:
        mn = mu_nu(s, r, bits, min_limit=need)
    return mn


def _unseen_tail(mn: MuNuResult, s: WilsonSeries, h: int):
    # geometric estimate for terms past the last coefficient
    if s.complete or mn.scan_limit < 2:
        return mpf(0)
    last, prev = mn.term(mn.scan_limit), mn.term(mn.scan_limit - 1)
    if prev == 0:
        return mpf(0)
    q = last / prev
    if q >= 1:
        return mpmath.inf
    n = mn.scan_limit
    growth = (mpf(n + 1) / n) ** h
    q = q * growth
    return last * (n + 1) ** h * q / (1 - q) if q < 1 else mpmath.inf


def tail_check(s: WilsonSeries, r, h=0, beta=10, omega=9, delta=1, gamma=4, sched=None, prec=None, mn=None) -> WVReport:
    """Terms with |k - N| >= kappa_tail, weighted by k^h, against mu N^h b(N)^((omega-1)/2)."""
    if not (0 < omega < beta):
        raise PreconditionError("need 0 < omega < beta")
    bits = bits_of(prec)
    with mp.workprec(bits):
        mn = mn or certified_mu_nu(s, r, delta, bits)
        N = mn.nu
        kappa = kappa_tail(N, beta, delta)
        total = mpf(0)
        for k in range(mn.scan_limit + 1):
            if abs(k - N) >= kappa:
                total += mpf(k) ** h * mn.term(k)
        total += _unseen_tail(mn, s, h)
        bound = mn.mu * mpf(N) ** h * mpf(b_of_n(N, delta)) ** (mpf(omega - 1) / 2)
        normal = True
        if sched is not None:
            normal, _ = is_tau_normal(s, r, gamma, sched, mn, bits)
        return WVReport(mn.r, N, kappa, total, bound, normal, {"h": h, "scan_limit": mn.scan_limit})


def wv_estimate_check(s: WilsonSeries, r, delta=1, gamma=4, prec=None, mn=None):
    """Whether every scanned term obeys the Gaussian-type decay bounds around N.

    Returns (ok, witness index or None).
    """
    bits = bits_of(prec)
    with mp.workprec(bits):
        mn = mn or certified_mu_nu(s, r, delta, bits)
        N = mn.nu
        if N < MIN_N:
            raise PreconditionError(f"needs N >= {MIN_N}")
        mu = mn.mu
        slack = 1 + mpf(2) ** (-(bits // 2))
        for k in range(1, mn.scan_limit - N + 1):
            bound = mu * mpmath.exp(-mpf(k) ** 2 * b_of_n(N + k, delta) / 2)
            if mn.term(N + k) > bound * slack:
                return False, N + k
        pre = 1 + 1 / (3 * mpf(N) ** (mpf(gamma) - 3))
        bN = b_of_n(N, delta)
        for k in range(N):
            bound = mu * pre * mpmath.exp(-mpf(k) ** 2 * bN / 2)
            if mn.term(N - k) > bound * slack:
                return False, N - k
    return True, None


def wv_main_check(f, s: WilsonSeries, r, n: int = 1, delta=1, seed: int = 0, extra_points: int = 8, prec=None, gamma=4, sched=None, mm=None, mn=None) -> WVReport:
    """Compare (x/N)^n D_W^n f(x) with f(x) on |x| = r.

    The primary residual is taken at the maximal-modulus point; the max over
    ``extra_points`` seeded random circle points is reported in details.
    ``mm`` and ``mn`` accept a precomputed max-modulus and maximal term.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    bits = bits_of(prec)
    with mp.workprec(bits):
        mn = mn or certified_mu_nu(s, r, delta, bits)
        N = mn.nu
        kappa = kappa_main(N, delta)
        # cancellation on the circle can cost up to log2(mu) bits
        fbits = wv_precision(mn.mu, bits)
        fn = f.handle(fbits) if hasattr(f, "handle") else f
        mm = mm or max_modulus(fn, mn.r, prec=fbits)
        rng = random.Random(seed)
        pts = [mm.point] + [mn.r * mpmath.expj(2 * mpmath.pi * mpf(rng.random())) for _ in range(extra_points)]
        res = []
        with mp.workprec(fbits):
            for x in pts:
                try:
                    d = cooper_dw_n(fn, x, n, fbits)
                except DegenerateNodeError:
                    d = apply_dw_iterated(fn, x, n, fbits)
                res.append(abs((x / N) ** n * d - to_mpc(fn(x))))
        bound = mpf(kappa) / N * mm.value
        normal = True
        if sched is not None:
            normal, _ = is_tau_normal(s, r, gamma, sched, mn, bits)
        details = {
            "n": n,
            "M": mm.value,
            "argmax": mm.point,
            "residual_all_points": max(res),
            "residual_over_M": res[0] / mm.value,
        }
        return WVReport(mn.r, N, kappa, res[0], bound, normal, details)


# ---------------------------------------------------------------- K_n bounds


def kn_bound(n: int, gamma) -> float:
    """K_n = (1 + n^(2-gamma))^n (1 - n^(2-gamma))^(-n), with K_0 = K_1 = 9."""
    if n < 0:
        raise PreconditionError("n must be >= 0")
    if n <= 1:
        return 9.0
    q = float(n) ** (2 - float(gamma))
    if q >= 1:
        raise PreconditionError("K_n needs n^(2-gamma) < 1")
    return math.exp(n * (math.log1p(q) - math.log1p(-q)))


def lemma_gg_check(s: WilsonSeries, f, n: int, r, gamma=4, M=None, prec=None) -> bool:
    """|a_n tau_n(r; 0)| <= K_n M(r; f) for r > max(4 n^2, n^gamma)."""
    if not r > max(4 * n * n, n ** float(gamma)):
        raise PreconditionError("lemma needs r > max(4 n^2, n^gamma)")
    bits = bits_of(prec)
    with mp.workprec(bits):
        r = mpf(r)
        if M is None:
            fn = f.handle(bits) if hasattr(f, "handle") else f
            M = max_modulus(fn, r, prec=bits).value
        t = abs(s.coeffs[n]) if n < len(s.coeffs) else mpf(0)
        for j in range(n):
            t *= r + j * j
        return bool(t <= kn_bound(n, gamma) * M * (1 + mpf(2) ** (-(bits // 2))))


def mbound_check(s: WilsonSeries, f, r, eps=0.25, gamma=4, M=None, mn=None, prec=None) -> bool:
    """mu <= K(r) M(r) <= mu (ln+ mu)^(1/2 + eps), with K(r) = K_{nu(r)}."""
    bits = bits_of(prec)
    with mp.workprec(bits):
        mn = mn or mu_nu(s, r, bits)
        if mn.mu < mpmath.e:
            raise PreconditionError("needs mu_W >= e")
        if M is None:
            fn = f.handle(bits) if hasattr(f, "handle") else f
            M = max_modulus(fn, mn.r, prec=bits).value
        K = mpf(kn_bound(mn.nu, gamma))
        mid = K * M
        return bool(mn.mu <= mid and mid <= mn.mu * mpmath.log(mn.mu) ** (mpf(1) / 2 + eps))
