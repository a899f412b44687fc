"""End-to-end acceptance suite.  Each test prints one PASS/FAIL line."""
import math
import time

import numpy as np

from strayfield import abbasis, bench, validation
from strayfield.s3harm import count_up_to, indices_up_to
from strayfield.solver import degree_factor, energy_breakdown

from helpers import benchmark_rows, benchmark_table, fd_gradient4
from test_abbasis import TABLE

N_LIST = [10, 20, 30, 40, 50, 60]


def _slopes(rows):
    ns = [r.N for r in rows]
    return (bench.fit_log_slope(ns, [r.rel_energy_err for r in rows]),
            bench.fit_log_slope(ns, [r.e0 for r in rows]))


def _table_criterion(case_id, energy_ns, check_e0):
    case = bench.get_case(case_id)
    ref = {r[0]: r for r in case.reference.rows}
    rows = {r.N: r for r in benchmark_rows(case_id)}
    worst_e = max(abs(rows[n].E_N - ref[n][1]) for n in energy_ns)
    ok = worst_e <= bench.ENERGY_TOL
    detail = f"max |dE|={worst_e:.1e}"
    if check_e0:
        worst_e0 = max(abs(rows[n].e0 - ref[n][3]) for n in N_LIST)
        ok &= worst_e0 <= bench.E0_TOL
        detail += f" max |de0|={worst_e0:.1e}"
    s_e, s_0 = _slopes(list(rows.values()))
    ok &= abs(s_e - case.reference.energy_slope) <= bench.SLOPE_TOL
    ok &= abs(s_0 - case.reference.e0_slope) <= bench.SLOPE_TOL
    detail += f" slopes {s_e:.3f}/{s_0:.3f} (target {case.reference.energy_slope}/{case.reference.e0_slope})"
    return ok, detail


def test_criterion_1_table1(acceptance_record):
    case = bench.get_case(1)
    t0 = time.perf_counter()
    bench.case_table(case, 60)
    elapsed = time.perf_counter() - t0
    ok, detail = _table_criterion(1, N_LIST, check_e0=True)
    ok &= elapsed < 120
    acceptance_record(1, ok, detail + f", N=60 table in {elapsed:.1f}s")
    assert ok


def test_criterion_2_table2(acceptance_record):
    ok, detail = _table_criterion(2, [10, 60], check_e0=False)
    acceptance_record(2, ok, detail)
    assert ok


def test_criterion_3_table3(acceptance_record):
    ok, detail = _table_criterion(3, [10, 60], check_e0=False)
    acceptance_record(3, ok, detail)
    assert ok


def test_criterion_4_closed_forms(acceptance_record):
    x = np.random.default_rng(2024).normal(scale=1.5, size=(100, 3))
    s = np.sum(x * x, axis=1)
    worst = 0.0
    for alpha, f in TABLE.items():
        ref = np.array([f(p, si) for p, si in zip(x, s)])
        worst = max(worst, float(np.max(np.abs(abbasis.w_alpha_array(alpha, x) - ref))))
    ok = len(TABLE) == 14 and worst < 1e-10
    acceptance_record(4, ok, f"14 forms, max deviation {worst:.1e}")
    assert ok


def test_criterion_5_orthogonality(acceptance_record):
    g = validation.s3_gram(6)
    d_s3 = float(np.max(np.abs(g - np.eye(len(g)))))
    g = validation.weighted_r3_gram(6)
    d_r3 = float(np.max(np.abs(g - np.eye(len(g)) / 4)))
    g = validation.gradient_gram(4)
    ref = validation.expected_gradient_gram(4)
    d_grad = float(np.max(np.abs(g - ref)) / np.max(np.abs(ref)))
    ok = d_s3 <= 1e-9 and d_r3 <= 1e-8 and d_grad <= 1e-6
    acceptance_record(5, ok, f"S3 {d_s3:.1e}, weighted R3 {d_r3:.1e}, gradient (rel) {d_grad:.1e}")
    assert ok


def test_criterion_6_eigen_relation(acceptance_record):
    rng = np.random.default_rng(6)
    worst = 0.0
    for a in indices_up_to(4):
        pts = []
        while len(pts) < 30:
            x = rng.normal(scale=0.8, size=3)
            if abs(abbasis.w_alpha(a, x)) > 1e-2:  # keep the quotient well conditioned
                pts.append(x)
        r = validation.eigen_ratio(a, np.array(pts))
        worst = max(worst, float(np.max(np.abs(r / degree_factor(a.k) - 1))))
    ok = worst <= 1e-4
    acceptance_record(6, ok, f"35 indices x 30 points, max rel deviation {worst:.1e}")
    assert ok


def test_criterion_7_gradient_oracle(acceptance_record):
    rng = np.random.default_rng(7)
    idx = indices_up_to(6)
    worst = 0.0
    for i in range(20):
        a = idx[rng.integers(len(idx))]
        x = rng.normal(scale=0.8, size=3)
        if i % 4 == 0:
            x[:2] = 0.0  # on the z-axis
        g = abbasis.grad_w_alpha(a, x).grad
        fd = fd_gradient4(lambda p: abbasis.w_alpha(a, p), x)
        worst = max(worst, float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-2)))
    ok = worst <= 1e-6
    acceptance_record(7, ok, f"20 pairs (5 on the z-axis), max rel deviation {worst:.1e}")
    assert ok


def test_criterion_8_identities(acceptance_record):
    worst = max(abs(r.e0 - math.sqrt(r.rel_energy_err)) for c in (1, 2, 3) for r in benchmark_rows(c))
    counts = all(count_up_to(n) == (n + 1) * (n + 2) * (2 * n + 3) // 6 == len(indices_up_to(n)) for n in range(21))
    ident = all(4 * (k + 1) ** 2 - 1 == (2 * k + 1) * (2 * k + 3) == degree_factor(k) for k in range(101))
    ok = worst <= 1e-12 and counts and ident
    acceptance_record(8, ok, f"e0 identity {worst:.1e}, counting {counts}, degree identity {ident}")
    assert ok


def test_criterion_9_monotone_and_bounded(acceptance_record):
    ok = True
    parts = []
    for c in (1, 2, 3):
        case = bench.get_case(c)
        cum = energy_breakdown(benchmark_table(c)).cumulative
        bound = 0.5 * case.magnetization_norm_squared()
        mono = all(b >= a for a, b in zip(cum, cum[1:]))
        below = max(cum) <= bound
        ok &= mono and below
        parts.append(f"ex{c} E_60={cum[-1]:.6f}<={bound:.6f}")
    acceptance_record(9, ok, ", ".join(parts))
    assert ok
