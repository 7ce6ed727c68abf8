"""Acceptance gate: one test per committed behavior, at the stated tolerance.

Each test prints a single summary line with the measured values; `pytest -v`
shows one pass/fail line per criterion.  Criterion 5 is expected to fail on
the power-weight half: see the assertion message there for the measured
numbers and the structural reason.
"""

import math
import time

import numpy as np

from uclab.carleman import (
    CorpusSpec,
    build_corpus,
    log_weight_estimate,
    log_weight_sweep,
    power_weight_estimate,
    power_weight_sweep,
    stability_summary,
)
from uclab.cli import run
from uclab.constants import (
    PipelineConfig,
    pipeline_a_and_C,
    three_sphere_constants,
    vanishing_order_pipeline,
)
from uclab.fields import EllipticOperator, harmonic_polynomial, make_indicial, power_radial
from uclab.pdesolver import assemble, manufactured_convergence, problem_from_reference
from uclab.quadrature import ball_norm_sq, doubling_ratio
from uclab.verify import (
    builtin_families,
    calibrate_C0,
    estimate_vanishing_order,
    order_bound_consistency,
    three_sphere_suite,
)


def test_criterion_1_constants_formulas():
    t0 = time.perf_counter()
    c = three_sphere_constants(math.exp(-4.0), math.exp(-2.0), n=2, C0=2.0, beta0=1.0)
    assert abs(c.A - 21.0) <= 1e-12
    assert abs(c.B - 3.0) <= 1e-12
    assert abs(c.tau - 0.125) <= 1e-12

    x = math.log(32.0)
    expected_a = (12.0 * x * x + 8.0 * x + 1.0) / (4.0 * x - 1.0)
    got = pipeline_a_and_C(1.0 / 32.0)
    assert abs(got.a - expected_a) <= 1e-9 * expected_a
    assert got.bounds_ok is True
    assert pipeline_a_and_C(1.0 / 16.0).bounds_ok is False
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"criterion 1: A=21 B=3 tau=0.125 exact, a({1/32})={got.a:.12f}, "
          f"bounds flip at 1/16 [{elapsed:.3f}s]")


def test_criterion_2_pipeline_matches_independent_reference():
    t0 = time.perf_counter()

    # Independent reference, written before the package was implemented and
    # kept verbatim; only the formulas below, no package imports.
    def reference_pipeline(n, R0, gamma, j0, rho, Ct=1.0):
        c = 1.0 / gamma
        a = ((4 * math.log(R0) - 1) ** 2 - (2 * math.log(R0)) ** 2) / (-1 - 4 * math.log(R0))
        t_0 = (math.log(2) - math.log(a * c) + math.log(math.log(rho))) / (
            -2 * math.log(R0) - math.log(a))
        s1 = max(1, math.ceil(t_0))
        Rj = lambda j: 1.0 / (gamma * (j + 0.5))
        s = s1
        if R0 ** (2 * s1) > Rj(j0):
            s = s1 + 1
            while R0 ** (2 * s) > Rj(j0):
                s += 1
        X = R0 ** (-2 * s) / gamma
        j1 = max(j0, math.floor(X - 0.5 + 4e-15 * max(1.0, X)))
        tol = 1e-12
        assert Rj(j1 + 1) < R0 ** (2 * s) * (1 + tol) and R0 ** (2 * s) <= Rj(j1) * (1 + tol)
        m1 = n + 2 * (j1 + 0.5)
        log2C3 = m1 + math.log2((8 * Ct + 2 * (m1 - n) ** 2) / (m1 - n) ** 2)
        return dict(s=s, j1=j1, m1=m1, log2C3=log2C3, R3=R0 ** (2 * s + 2) / 8)

    ref = reference_pipeline(n=2, R0=1.0 / 32.0, gamma=2.0, j0=2, rho=2.0**40)
    res = vanishing_order_pipeline(PipelineConfig(), 2.0**40)
    assert res.s == ref["s"] == 1
    assert res.j1 == ref["j1"] == 511
    assert res.m1 == ref["m1"] == 1025.0
    assert res.R3 == ref["R3"] == 2.0**-23
    assert 1026.0 <= res.log2_C3 <= 1027.0
    assert abs(res.log2_C3 - ref["log2C3"]) <= 1e-9
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"criterion 2: s=1 j1=511 m1=1025 R3=2^-23 log2C3={res.log2_C3:.9f} "
          f"matches reference [{elapsed:.3f}s]")


def test_criterion_3_quadrature_closed_forms():
    t0 = time.perf_counter()

    def indicial_exact(sigma, l, R):
        ang = math.pi if l >= 1 else 2.0 * math.pi
        return ang * R ** (2.0 * sigma + 2.0) / (2.0 * sigma + 2.0)

    checks = [(power_radial(2, 0.0), 0.0, 0)]
    checks.append((harmonic_polynomial(2, 1), 1.0, 1))
    for sigma in (1.5, 2.5):
        for l in range(5):
            checks.append((make_indicial(2, sigma, l)[0], sigma, l))
    for u, sigma, l in checks:
        for R in (0.25, 0.7):
            exact = indicial_exact(sigma, l, R)
            got = ball_norm_sq(u, R)
            assert abs(got - exact) <= 1e-9 * exact, (u.name, R)
        ratio = doubling_ratio(u, 0.2)
        exact_ratio = 2.0 ** (2.0 * sigma + 2.0)
        assert abs(ratio - exact_ratio) <= 1e-9 * exact_ratio, u.name
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    print(f"criterion 3: {len(checks)} fields x 2 radii match closed forms to 1e-9, "
          f"doubling ratios = 2^(2s+n) [{elapsed:.3f}s]")


def test_criterion_4_three_sphere_margins_and_calibration():
    t0 = time.perf_counter()
    fields = builtin_families(2)
    records = three_sphere_suite(fields, (1.0 / 32.0, 1.0 / 64.0), n=2, C0=2.0, beta0=1.0)
    assert len(records) == 34
    worst = min(r.margin for r in records)
    assert all(math.isfinite(r.margin) for r in records)
    assert worst >= 0.0
    calibrated = calibrate_C0(fields, (1.0 / 32.0, 1.0 / 64.0), n=2, beta0=1.0)
    assert calibrated <= 2.0**10
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    print(f"criterion 4: 34 margins >= 0 (min {worst:.4f}), calibrated C0 = "
          f"{calibrated:g} [{elapsed:.1f}s]")


def test_criterion_5_carleman_stability_and_invariance():
    t0 = time.perf_counter()
    corpus = build_corpus(CorpusSpec())
    reports = log_weight_sweep(corpus) + power_weight_sweep(corpus)
    summary = stability_summary(reports)

    u = corpus[3]
    for estimate, param in (("log", 16.0), ("power", 5.5)):
        fn = log_weight_estimate if estimate == "log" else power_weight_estimate
        base = fn(u, param).ratio
        scaled = fn(u.scaled(7.0), param).ratio
        assert abs(scaled - base) <= 1e-12 * base, estimate

    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    for name in ("log", "power"):
        s = summary[name]
        print(f"criterion 5 [{name}]: max {s['max']:.6g}, median {s['median']:.6g}, "
              f"max/median {s['max_over_median']:.3f} (limit 10) [{elapsed:.1f}s]")
    assert summary["log"]["max_over_median"] <= 10.0
    assert summary["power"]["max_over_median"] <= 10.0, (
        f"power-weight max/median = {summary['power']['max_over_median']:.2f} > 10. "
        "This is structural, not a quadrature artifact: for any fixed corpus "
        "supported in an annulus, the power-weight ratio decays like m^-2 "
        "across the swept m (the inner support edge contributes a boundary "
        "layer of width ~1/sqrt(m), and the right side carries two more "
        "derivatives than the left, each worth a factor m), so the sweep "
        "spans a ~(m_max/m_min)^2 ~ 187x range of ratios and no single 10x "
        "max/median band can hold. Per-member and per-parameter groupings "
        "stay within 10x; the cross-parameter grouping asserted here cannot."
    )


def test_criterion_6_vanishing_order_slopes_and_consistency():
    t0 = time.perf_counter()
    radii = np.geomspace(0.5, 1e-3, 12)
    worst = 0.0
    for u in builtin_families(2):
        sigma = u.radial_exponent
        assert sigma is not None
        slope = estimate_vanishing_order(u, radii)
        worst = max(worst, abs(slope - (2.0 * sigma + 2.0)))
    assert worst <= 1e-3
    for l in range(1, 6):
        report = order_bound_consistency(harmonic_polynomial(2, l))
        assert report.consistent, (l, report.slope, report.m1)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    print(f"criterion 6: max slope error {worst:.2e} over 17 families; "
          f"slope <= m1 for l = 1..5 [{elapsed:.1f}s]")


def test_criterion_7_solver_convergence_and_residual():
    from scipy.sparse.linalg import spsolve

    t0 = time.perf_counter()
    lap = EllipticOperator.laplacian(2)
    u2, c2 = make_indicial(2, 2.5, 1)
    u3, c3 = make_indicial(2, 3.0, 0)
    assert c3 == 9.0
    refs = [(harmonic_polynomial(2, 1), 0.0, 0.5), (u2, c2, 0.25), (u3, c3, 0.25)]
    orders = []
    for u, c1, r_in in refs:
        problem = problem_from_reference(lap, r_in, 1.0, u, c1=c1)
        table = manufactured_convergence(problem, u, levels=(64, 128, 256))
        assert all(1.7 <= p <= 2.3 for p in table.orders), (u.name, table.orders)
        orders.append(table.orders[-1])
        A, b = assemble(problem_from_reference(lap, r_in, 1.0, u, c1=c1,
                                               Nr=256, Ntheta=256))
        x = spsolve(A, b)
        res = np.max(np.abs(A @ x - b))
        assert res <= 1e-10 * max(1.0, np.max(np.abs(b))), u.name
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    print(f"criterion 7: orders {['%.3f' % p for p in orders]} in [1.7, 2.3], "
          f"residuals <= 1e-10 at 256^2 [{elapsed:.1f}s]")


def test_criterion_8_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    dirs = (tmp_path / "run1", tmp_path / "run2")
    for d in dirs:
        assert run(["all", "--seed", "42", "--out", str(d)]) == 0
    names = sorted(p.name for p in dirs[0].glob("*.csv"))
    assert len(names) == 8
    for name in names:
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), name
    elapsed = time.perf_counter() - t0
    print(f"criterion 8: {len(names)} CSVs byte-identical across two seeded runs "
          f"[{elapsed:.1f}s]")
