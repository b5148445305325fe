"""Wiman-Valiron scans over a log-spaced radius grid.

:func:`run_wv_scan` evaluates every per-radius check on one series and
:func:`summarize` turns the rows into decade medians and pass/fail verdicts.
Per-radius work is pure, so the grid can fan out to a process pool; rows come
back ordered by radius either way.
"""
from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from mpmath import mp, mpf

from .errors import DegenerateNodeError, EvaluationError, PreconditionError, TruncationError
from .numerics import bits_of, max_modulus
from .series import EntireFunctionSpec, WilsonSeries, expand_wilson
from .wiman_valiron import (
    MIN_N,
    certified_mu_nu,
    flagged_log_measure,
    is_tau_normal,
    make_schedule,
    mbound_check,
    mu_nu,
    order_from_coeffs,
    order_from_nu,
    tail_check,
    wv_estimate_check,
    wv_main_check,
    wv_precision,
)

__all__ = ["Thresholds", "ScanRow", "ScanReport", "log_grid", "scan_radius", "run_wv_scan", "summarize"]

N_MAX_START = 200
N_MAX_CAP = 800


@dataclass(frozen=True)
class Thresholds:
    tail_final: float = 0.1
    wv_over_M_final: float = 0.05
    wv_over_bound: float = 1.0
    flagged_measure: float = 1.0


@dataclass
class ScanRow:
    r: float
    status: str = "ok"
    nu: Optional[int] = None
    mu: Optional[mpf] = None
    M: Optional[mpf] = None
    tau_normal: Optional[bool] = None
    evaluable: bool = False
    tail_ratio: Optional[mpf] = None
    wv: dict = field(default_factory=dict)  # order -> (residual/bound, residual/M)
    wv_estimate: Optional[bool] = None
    mbound: Optional[bool] = None
    message: str = ""


@dataclass
class ScanReport:
    rows: list
    summary: dict
    series: WilsonSeries
    config: dict


def log_grid(rmin, rmax, ppd: int) -> list:
    """Radii 10^(e0 + i/ppd) from rmin up to rmax inclusive."""
    if rmin < 1 or rmax < rmin:
        raise PreconditionError("need 1 <= rmin <= rmax")
    if ppd < 4:
        raise PreconditionError("points per decade must be >= 4")
    e0, e1 = math.log10(rmin), math.log10(rmax)
    count = int(math.floor((e1 - e0) * ppd + 1e-9))
    return [10.0 ** (e0 + i / ppd) for i in range(count + 1)]


def scan_radius(f, s: WilsonSeries, r, delta=1, gamma=4, beta=10, omega=9, orders=(1,), seed=0, prec=None) -> ScanRow:
    """All per-radius checks at one radius. Numeric aborts are recorded, not raised."""
    bits = bits_of(prec)
    sched = make_schedule(delta)
    row = ScanRow(float(r))
    try:
        with mp.workprec(bits):
            mn = mu_nu(s, r, bits)
            row.nu, row.mu = mn.nu, mn.mu
            row.tau_normal, _ = is_tau_normal(s, r, gamma, sched, mn, bits)
            fbits = wv_precision(mn.mu, bits)
            fn = f.handle(fbits)
            mm = max_modulus(fn, mn.r, prec=fbits)
            row.M = mm.value
            if mn.mu >= mp.e:
                row.mbound = mbound_check(s, f, r, gamma=gamma, M=mm.value, mn=mn, prec=bits)
            if mn.nu < MIN_N:
                row.status = "below_min_n"
                return row
            mc = certified_mu_nu(s, r, delta, bits)
            row.evaluable = True
            row.tail_ratio = tail_check(s, r, 0, beta, omega, delta, gamma, prec=bits, mn=mc).ratio
            row.wv_estimate, _ = wv_estimate_check(s, r, delta, gamma, bits, mn=mc)
            for n in orders:
                rep = wv_main_check(f, s, r, n, delta, seed, prec=bits, gamma=gamma, mm=mm, mn=mc)
                row.wv[n] = (rep.ratio, rep.details["residual_over_M"])
    except TruncationError as exc:
        row.status, row.message, row.evaluable = "truncated", str(exc), False
    except (DegenerateNodeError, EvaluationError) as exc:
        row.status, row.message, row.evaluable = "numeric_abort", str(exc), False
    return row


def _scan_task(args):
    return scan_radius(*args[:3], **args[3])


def _map(tasks, workers):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scan_task, tasks))
    return [_scan_task(t) for t in tasks]


def run_wv_scan(
    f: EntireFunctionSpec,
    grid: Sequence,
    delta=1,
    gamma=4,
    beta=10,
    omega=9,
    orders=(1,),
    seed: int = 0,
    prec=None,
    n_max: Optional[int] = None,
    series: Optional[WilsonSeries] = None,
    workers: int = 1,
    thresholds: Thresholds = Thresholds(),
) -> ScanReport:
    """Expand f (unless ``series`` is given) and scan the grid.

    With ``n_max`` unset the expansion starts at 200 coefficients and doubles
    while any radius runs out of coefficients, up to 800.
    """
    if not (0 < omega < beta):
        raise PreconditionError("need 0 < omega < beta")
    bits = bits_of(prec)
    grid = sorted(float(r) for r in grid)
    orders = tuple(sorted(set(int(n) for n in orders)))
    if not orders or orders[0] < 1:
        raise PreconditionError("orders must be >= 1")
    auto = series is None and n_max is None
    size = n_max if n_max is not None else N_MAX_START
    s = series if series is not None else expand_wilson(f, 0, size, bits, gate=False)
    opts = dict(delta=delta, gamma=gamma, beta=beta, omega=omega, orders=orders, seed=seed, prec=bits)
    rows = _map([(f, s, r, opts) for r in grid], workers)
    while auto and not s.complete and any(row.status == "truncated" for row in rows) and size < N_MAX_CAP:
        size = min(2 * size, N_MAX_CAP)
        s = expand_wilson(f, 0, size, bits, gate=False)
        redo = [i for i, row in enumerate(rows) if row.status == "truncated"]
        for i, row in zip(redo, _map([(f, s, grid[i], opts) for i in redo], workers)):
            rows[i] = row
    config = dict(opts, n_max=len(s.coeffs) - 1, label=f.label, rmin=grid[0], rmax=grid[-1], points=len(grid))
    return ScanReport(rows, summarize(rows, s, orders, thresholds), s, config)


def _median(vals):
    vals = [v for v in vals if v is not None]
    return statistics.median(vals) if vals else None


def _decades(rows, count=3):
    # windows (rmax/10^(k+1), rmax/10^k], returned in increasing r
    rmax = rows[-1].r
    out = []
    for k in range(count - 1, -1, -1):
        lo, hi = rmax / 10 ** (k + 1), rmax / 10**k
        out.append([row for row in rows if lo * (1 + 1e-12) < row.r <= hi * (1 + 1e-12)])
    return out


def summarize(rows: list, s: WilsonSeries, orders=(1,), thresholds: Thresholds = Thresholds()) -> dict:
    """Decade medians, fitted exponents and pass/fail against the thresholds."""
    nus = [row.nu for row in rows if row.nu is not None]
    out = {"radii": len(rows), "truncated": sum(row.status == "truncated" for row in rows)}
    if s.complete:
        out.update(
            degenerate=True,
            nu_constant=len(set(nus)) <= 1,
            nu_values=sorted(set(nus)),
            note="polynomial input: nu is eventually constant, no asymptotic claims",
            passed=True,
        )
        return out

    flags = [row.tau_normal is False for row in rows]
    measure = flagged_log_measure([row.r for row in rows], flags) if len(rows) > 1 else 0.0
    good = [row for row in rows if row.tau_normal and row.evaluable]
    ok = {id(row) for row in good}
    checks = {}

    windows = _decades(rows)
    tail_medians = [_median([row.tail_ratio for row in w if id(row) in ok]) for w in windows]
    present = [m for m in tail_medians if m is not None]
    checks["tail_nonincreasing"] = bool(present) and all(b <= a for a, b in zip(present, present[1:]))
    checks["tail_final_median"] = tail_medians[-1] is not None and tail_medians[-1] < thresholds.tail_final

    wv_summary = {}
    for n in orders:
        final = _median([row.wv[n][1] for row in windows[-1] if id(row) in ok and n in row.wv])
        worst = max((row.wv[n][0] for row in good if n in row.wv), default=None)
        wv_summary[n] = {"final_median_over_M": final, "max_over_bound": worst}
        checks[f"wv{n}_final_median_over_M"] = final is not None and final < thresholds.wv_over_M_final
        checks[f"wv{n}_over_bound"] = worst is not None and worst < thresholds.wv_over_bound

    checks["wv_estimate"] = bool(good) and all(row.wv_estimate for row in good)
    mb = [row.mbound for row in rows if row.tau_normal and row.mbound is not None]
    checks["mbound"] = bool(mb) and all(mb)
    checks["flagged_measure"] = measure < thresholds.flagged_measure

    try:
        nu_order = order_from_nu([(row.r, row.nu) for row in rows if row.nu is not None])
    except PreconditionError:
        nu_order = None
    try:
        coeff_order = order_from_coeffs(s)
    except PreconditionError:
        coeff_order = None

    out.update(
        degenerate=False,
        evaluable=len(good),
        flagged=sum(flags),
        flagged_log_measure=measure,
        tail_decade_medians=tail_medians,
        wv=wv_summary,
        order_from_nu=nu_order,
        order_from_coeffs=coeff_order,
        checks=checks,
        passed=all(checks.values()),
    )
    return out
