"""Acceptance criteria 1-12, each at its stated tolerance and time budget.

Every test prints one ``criterion N: PASS|FAIL`` line as it finishes; the
collected lines are repeated in the terminal summary.
"""
import random
import time
from fractions import Fraction as Fr
from pathlib import Path

import pytest

from wilsonwv.cli import main
from wilsonwv.combinatorics import (
    apply_matrix,
    central_factorial_t,
    central_factorial_t_closed,
    leibniz_c,
    leibniz_c_recurrence,
    leibniz_c_sum_recurrence,
    maclaurin_to_wilson_matrix,
    matmul,
    wilson_to_maclaurin_matrix,
)
from wilsonwv.difference_equations import counterexample_equation, counterexample_identities, eigen_check, equation_residual, newton_polygon
from wilsonwv.identities import run_suite
from wilsonwv.scan import log_grid, run_wv_scan
from wilsonwv.series import EntireFunctionSpec, expand_wilson
from wilsonwv.wiman_valiron import check_schedule, make_schedule, mu_nu, order_from_coeffs, order_from_nu

INPUTS = Path(__file__).resolve().parent.parent / "inputs"

TABLE_1 = {
    (0, 0): 1,
    (1, 0): 1, (1, 1): 0,
    (2, 0): 1, (2, 1): Fr(-1, 2), (2, 2): 0,
    (3, 0): 1, (3, 1): Fr(-3, 2), (3, 2): Fr(3, 4), (3, 3): 0,
    (4, 0): 1, (4, 1): -3, (4, 2): Fr(15, 4), (4, 3): Fr(-15, 8), (4, 4): 0,
    (5, 0): 1, (5, 1): -5, (5, 2): Fr(45, 4), (5, 3): Fr(-105, 8), (5, 4): Fr(105, 16), (5, 5): 0,
}


@pytest.fixture
def report(acceptance_lines, capsys):
    def emit(number, passed, detail, elapsed, budget):
        within = elapsed < budget
        verdict = "PASS" if passed and within else "FAIL"
        line = f"criterion {number:>2}: {verdict}  {detail}  [{elapsed:.1f} s / {budget:g} s]"
        acceptance_lines.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert passed, line
        assert within, line

    return emit


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_01_table(report):
    with Timer() as t:
        bad = [(nk, leibniz_c(*nk)) for nk, v in TABLE_1.items() if leibniz_c(*nk) != v]
    report(1, len(TABLE_1) == 21 and not bad, f"21 entries exact, mismatches={bad}", t.elapsed, 1)


def test_criterion_02_triple_oracle(report):
    with Timer() as t:
        bad = [
            (n, k)
            for n in range(51)
            for k in range(n + 1)
            if not (leibniz_c(n, k) == leibniz_c_recurrence(n, k) == leibniz_c_sum_recurrence(n, k))
        ]
    report(2, not bad, f"0<=k<=n<=50, disagreements={len(bad)}", t.elapsed, 5)


def test_criterion_03_central_factorial(report):
    with Timer() as t:
        bad = [(k, n) for k in range(1, 31) for n in range(1, k + 1) if central_factorial_t(k, n) != central_factorial_t_closed(k, n)]
        spots = [central_factorial_t(2, 1), central_factorial_t(3, 2), central_factorial_t(4, 2), central_factorial_t(4, 3)]
    report(3, not bad and spots == [1, 5, 21, 14], f"1<=n<=k<=30 mismatches={len(bad)}, spots={spots}", t.elapsed, 5)


def test_criterion_04_round_trip(report):
    rng = random.Random(0)
    with Timer() as t:
        fails = 0
        for _ in range(100):
            deg = rng.randint(0, 20)
            b = [Fr(rng.randint(-99, 99), rng.randint(1, 12)) for _ in range(deg + 1)]
            a = apply_matrix(maclaurin_to_wilson_matrix(deg), b)
            fails += apply_matrix(wilson_to_maclaurin_matrix(deg), a) != b
        eye = [[int(i == j) for j in range(41)] for i in range(41)]
        prod_ok = matmul(maclaurin_to_wilson_matrix(40), wilson_to_maclaurin_matrix(40)) == eye
    report(4, fails == 0 and prod_ok, f"100 polynomials deg<=20 failures={fails}, K=40 product identity={prod_ok}", t.elapsed, 10)


def test_criterion_05_operator_suite(report):
    orders = {"leibniz": 5, "cooper": 6, "taurule": 8}
    limits = {"product": 1e-10, "quotient": 1e-10, "commutator": 1e-10, "leibniz": 1e-10, "cooper": 1e-9, "taurule": 1e-12}
    with Timer() as t:
        res = {name: run_suite(name, seed=0, prec=128, n=orders.get(name)) for name in limits}
    ok = all(r.max_residual <= limits[n] and r.samples == 20 for n, r in res.items())
    detail = ", ".join(f"{n}={float(r.max_residual):.1e}" for n, r in res.items())
    report(5, ok, detail, t.elapsed, 30)


def test_criterion_06_eigenfunctions(report):
    pts = [1, 4, 9, 16, 25]
    with Timer() as t:
        r1 = eigen_check(1, pts).max_residual
        r2 = eigen_check(2, pts).max_residual
    report(6, r1 <= 1e-6 and r2 <= 1e-6, f"lambda=1 {float(r1):.1e}, lambda=2 {float(r2):.1e}", t.elapsed, 10)


def test_criterion_07_counterexample(report):
    pts = [1, 4, 25]
    with Timer() as t:
        ids = counterexample_identities(pts)
        eq = counterexample_equation()
        f = EntireFunctionSpec.gamma_reciprocal_sum().handle(128)
        res = equation_residual(eq, f, pts)
        slopes = newton_polygon(eq).edge_slopes
    first, second = max(ids.first), max(ids.second)
    ok = first <= 1e-8 and second <= 1e-8 and res <= 1e-6 and set(slopes) == {Fr(1)} and Fr(1, 2) not in slopes
    detail = f"first {float(first):.1e}, second {float(second):.1e}, equation {float(res):.1e}, slopes {[str(q) for q in slopes]}"
    report(7, ok, detail, t.elapsed, 10)


def test_criterion_08_order_pipeline(report):
    rs = [10 ** (3 + k / 4) for k in range(17)]
    with Timer() as t:
        got = {}
        for gamma in (4, 5):
            spec = EntireFunctionSpec.factorial_power(gamma)
            got[gamma, "coeffs"] = order_from_coeffs(expand_wilson(spec, 0, 120, gate=False))
            long = expand_wilson(spec, 0, 200, gate=False)
            got[gamma, "nu"] = order_from_nu([(r, mu_nu(long, r).nu) for r in rs])
    window = {4: (0.20, 0.30), 5: (0.15, 0.25)}
    ok = all(window[g][0] <= v <= window[g][1] for (g, _), v in got.items())
    detail = ", ".join(f"gamma={g} {route}={v:.3f}" for (g, route), v in got.items())
    report(8, ok, detail, t.elapsed, 300)


@pytest.fixture(scope="module")
def fp4_scan():
    start = time.perf_counter()
    rep = run_wv_scan(
        EntireFunctionSpec.factorial_power(4), log_grid(1e3, 1e6, 8), delta=1, gamma=4, beta=10, omega=9, orders=(1, 2), seed=0, prec=128
    )
    return rep, time.perf_counter() - start


def test_criterion_09_wiman_valiron(report, fp4_scan):
    rep, elapsed = fp4_scan
    s = rep.summary
    c = s["checks"]
    parts = {
        "a": c["tail_nonincreasing"] and c["tail_final_median"],
        "b": all(c[f"wv{n}_final_median_over_M"] and c[f"wv{n}_over_bound"] for n in (1, 2)),
        "c": c["wv_estimate"],
        "d": c["flagged_measure"],
    }
    med = [None if m is None else f"{float(m):.2e}" for m in s["tail_decade_medians"]]
    wv = {n: (f"{float(v['final_median_over_M']):.2e}", f"{float(v['max_over_bound']):.2e}") for n, v in s["wv"].items()}
    detail = (
        f"{parts} tail medians {med}, wv (final median/M, max/bound) {wv}, "
        f"flagged {s['flagged']} measure {s['flagged_log_measure']:.3f}, evaluable {s['evaluable']}/{s['radii']}"
    )
    report(9, all(parts.values()), detail, elapsed, 900)


def test_criterion_10_mbound(report, fp4_scan):
    rep, elapsed = fp4_scan
    with Timer() as t:
        normal = [row for row in rep.rows if row.tau_normal]
        held = [row.mbound for row in normal]
    ok = bool(normal) and all(v is True for v in held)
    report(10, ok, f"sandwich holds at {sum(v is True for v in held)}/{len(normal)} non-flagged radii", elapsed + t.elapsed, 900)


def test_criterion_11_schedule(report):
    with Timer() as t:
        scheds = {d: make_schedule(d) for d in (0.5, 1, 2)}
        checks = {d: check_schedule(s, 10**5) for d, s in scheds.items()}
    detail = ", ".join(f"delta={d}: ln t0={float(scheds[d].log_t0):.4g} ok={c.ok}" for d, c in checks.items())
    report(11, all(c.ok for c in checks.values()), detail + " (n <= 1e5)", t.elapsed, 30)


def test_criterion_12_determinism(report, tmp_path):
    argv = ["wv-scan", "--input", str(INPUTS / "factorial_power4.json"), "--rmin", "3e4", "--rmax", "3e5", "--ppd", "4", "--order-n", "1", "2", "--seed", "7"]
    with Timer() as t:
        outs = []
        for i in range(2):
            path = tmp_path / f"run{i}.json"
            main(argv + ["--output", str(path)])
            outs.append(path.read_bytes())
    report(12, outs[0] == outs[1] and len(outs[0]) > 0, f"two runs, {len(outs[0])} bytes each, identical={outs[0] == outs[1]}", t.elapsed, 600)
