"""Three-sphere, vanishing-order, and doubling checks on the analytic families."""

import math

import numpy as np
import pytest

from uclab.carleman import annulus_cutoff, CompactField
from uclab.constants import PipelineConfig, three_sphere_constants
from uclab.errors import (
    InsufficientDecay,
    InvalidRatios,
    RadiusTooLarge,
    ZeroNorm,
    ZeroSolution,
)
from uclab.fields import harmonic_polynomial, make_indicial, power_radial
from uclab.verify import (
    SphereTriple,
    builtin_families,
    calibrate_C0,
    check_doubling,
    check_three_sphere,
    doubling_suite,
    estimate_vanishing_order,
    measure_norm_ratio,
    order_bound_consistency,
    three_sphere_suite,
    vanishing_order_records,
    write_verification_csv,
)


def compact_const():
    return CompactField(power_radial(2, 0.0), annulus_cutoff(0.1, 0.2))


# ------------------------------------------------------------ sphere triple

def test_sphere_triple_validation():
    with pytest.raises(InvalidRatios):
        SphereTriple(0.2, 0.1, 1.0)
    with pytest.raises(InvalidRatios):
        SphereTriple(0.1, 0.3, 1.0)  # r2/r3 > 1/4
    t = SphereTriple(0.01, 0.1, 1.0)
    assert t.ratios == (0.01, 0.1)
    assert t.scaled(2.0).ratios == t.ratios


# ------------------------------------------------------------- three-sphere

def test_three_sphere_constant_field_closed_form():
    # for u == 1 the ball volumes cancel and the margin is log C + 3
    consts = three_sphere_constants(math.exp(-4), math.exp(-2))
    triple = SphereTriple(math.exp(-4), math.exp(-2), 1.0)
    rec = check_three_sphere(power_radial(2, 0.0), triple, consts)
    assert rec.margin == pytest.approx(consts.log_C + 3.0, abs=1e-12)
    assert rec.check == "three-sphere"
    assert rec.radii == (triple.r1, triple.r2, triple.r3)


def test_three_sphere_amplitude_invariant():
    u = harmonic_polynomial(2, 3)
    consts = three_sphere_constants(1e-4, 1e-2)
    triple = SphereTriple(1e-4, 1e-2, 1.0)
    m1 = check_three_sphere(u, triple, consts).margin
    m2 = check_three_sphere(u.scaled(137.0), triple, consts).margin
    assert m2 == pytest.approx(m1, abs=1e-12)


def test_three_sphere_rescaling_invariant():
    # (r1, r2, r3, u) -> (s r1, s r2, s r3, u(x/s)) leaves the margin alone
    u = make_indicial(2, 2.5, 1)[0]
    consts = three_sphere_constants(1e-4, 1e-2)
    triple = SphereTriple(1e-4, 1e-2, 1.0)
    s = 0.35
    m1 = check_three_sphere(u, triple, consts).margin
    m2 = check_three_sphere(u.dilated(1.0 / s), triple.scaled(s), consts).margin
    assert m2 == pytest.approx(m1, abs=1e-10)


def test_three_sphere_zero_norm():
    # supported away from 0: inner ball empty, middle ball not
    u = compact_const()
    consts = three_sphere_constants(1e-4, 0.05)
    with pytest.raises(ZeroNorm):
        check_three_sphere(u, SphereTriple(1e-4, 0.05, 1.0), consts)


def test_builtin_suite_margins_nonnegative():
    # the master property: no hard failure and no negative margin at defaults
    fields = builtin_families()
    assert len(fields) == 17
    assert len({f.name for f in fields}) == 17
    records = three_sphere_suite(fields)
    assert len(records) == 34
    assert all(math.isfinite(r.margin) for r in records)
    assert min(r.margin for r in records) >= 0.0


def test_calibrated_constant_is_minimal_power():
    assert calibrate_C0(builtin_families()) == 2.0


# ---------------------------------------------------------- vanishing order

def test_slope_exact_on_homogeneous_fields():
    radii = np.geomspace(1e-2, 1e-5, 10)
    assert estimate_vanishing_order(harmonic_polynomial(2, 2), radii) == pytest.approx(
        6.0, abs=1e-6
    )
    assert estimate_vanishing_order(make_indicial(2, 2.5, 1)[0], radii) == pytest.approx(
        7.0, abs=1e-6
    )
    assert estimate_vanishing_order(power_radial(2, 0.0), radii) == pytest.approx(
        2.0, abs=1e-9
    )


def test_slope_placement_independent():
    u = harmonic_polynomial(2, 4)
    a = estimate_vanishing_order(u, np.geomspace(1e-1, 1e-4, 8))
    b = estimate_vanishing_order(u, np.geomspace(3e-3, 2e-6, 23))
    assert a == pytest.approx(b, abs=1e-6)
    assert a == pytest.approx(10.0, abs=1e-6)


def test_slope_input_validation():
    u = harmonic_polynomial(2, 1)
    with pytest.raises(ValueError):
        estimate_vanishing_order(u, np.geomspace(1e-2, 1e-5, 7))
    with pytest.raises(ValueError):
        estimate_vanishing_order(u, np.geomspace(1e-5, 1e-2, 10))
    with pytest.raises(ValueError):
        estimate_vanishing_order(u, np.geomspace(1e-2, 5e-3, 10))


def test_slope_insufficient_decay():
    with pytest.raises(InsufficientDecay):
        estimate_vanishing_order(compact_const(), np.geomspace(1e-3, 1e-5, 10))


# ----------------------------------------------------------------- doubling

def test_doubling_homogeneous_closed_form():
    margins = []
    for l in (1, 2, 3):
        rec = check_doubling(harmonic_polynomial(2, l), 0.05, 50.0, 0.1)
        assert rec.lhs_log == pytest.approx(2 * l + 2, rel=1e-9)
        assert rec.margin == pytest.approx(50.0 - (2 * l + 2), rel=1e-9)
        margins.append(rec.margin)
    assert margins == sorted(margins, reverse=True)


def test_doubling_constant_field():
    rec = check_doubling(power_radial(2, 0.0), 0.03, 10.0, 0.1)
    assert rec.lhs_log == pytest.approx(2.0, rel=1e-12)
    assert rec.margin == pytest.approx(8.0, rel=1e-12)


def test_doubling_radius_too_large():
    with pytest.raises(RadiusTooLarge):
        check_doubling(power_radial(2, 0.0), 0.2, 10.0, 0.1)


def test_doubling_zero_norm():
    with pytest.raises(ZeroNorm):
        check_doubling(compact_const(), 0.01, 10.0, 0.1)


def test_doubling_suite_shape():
    recs = doubling_suite([power_radial(2, 0.0)], 10.0, 0.08)
    assert [r.radii[0] for r in recs] == pytest.approx([0.08, 0.04, 0.02])
    assert all(r.check == "doubling" for r in recs)


# ----------------------------------------------------------- norm ratio

def test_measure_norm_ratio_homogeneous():
    # I(R0^2)/I(R0^4) = (R0^-2)^(2 sigma + n) = 32^8 = 2^40 for r cos(theta)
    rho = measure_norm_ratio(harmonic_polynomial(2, 1), 1.0 / 32.0)
    assert rho == pytest.approx(2.0**40, rel=1e-10)


def test_measure_norm_ratio_errors():
    with pytest.raises(ZeroSolution):
        measure_norm_ratio(compact_const(), 1.0 / 32.0)
    with pytest.raises(ValueError):
        measure_norm_ratio(power_radial(2, 0.0), 1.5)


# ------------------------------------------------------- order-bound check

def test_order_bound_worked_configuration():
    rep = order_bound_consistency(harmonic_polynomial(2, 1))
    assert rep.rho == pytest.approx(2.0**40, rel=1e-9)
    assert rep.slope == pytest.approx(4.0, abs=1e-6)
    assert rep.pipeline.s == 1
    assert rep.pipeline.j1 == 511
    assert rep.m1 == 1025.0
    assert rep.pipeline.log2_C3 == pytest.approx(1026.000005514199, abs=1e-9)
    assert rep.pipeline.R3 == pytest.approx(2.0**-23, rel=1e-12)
    assert rep.consistent


def test_order_bound_harmonic_sweep_monotone():
    reports = [order_bound_consistency(harmonic_polynomial(2, l)) for l in range(1, 6)]
    for l, rep in zip(range(1, 6), reports):
        assert rep.consistent
        assert rep.slope == pytest.approx(2 * l + 2, abs=1e-6)
    m1s = [rep.m1 for rep in reports]
    assert m1s == sorted(m1s)


def test_vanishing_order_records_schema():
    recs = vanishing_order_records([harmonic_polynomial(2, 1), power_radial(2, 0.0)])
    assert [r.check for r in recs] == ["vanishing-order", "vanishing-order"]
    for r in recs:
        assert r.margin == pytest.approx(r.rhs_log - r.lhs_log, rel=1e-12)
        assert r.margin > 0


# ------------------------------------------------------------------- CSV

def test_verification_csv_deterministic(tmp_path):
    recs = doubling_suite([power_radial(2, 0.0), harmonic_polynomial(2, 1)], 10.0, 0.08)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_verification_csv(recs, p1)
    write_verification_csv(recs, p2)
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0] == "check,field,r1,r2,r3,lhs_log,rhs_log,margin"
    assert len(lines) == 7
    row = lines[1].split(",")
    assert row[0] == "doubling"
    assert float(row[-1]) == pytest.approx(recs[0].margin, rel=1e-15)
