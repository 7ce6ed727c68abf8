"""Quadrature against closed forms: balls, weighted annuli, doubling ratios."""

import math

import numpy as np
import pytest
from scipy.special import erfi

from uclab.errors import DegenerateAnnulus, NonIntegrable, WeightOverflow
from uclab.fields import (
    GridField,
    harmonic_polynomial,
    make_indicial,
    power_radial,
    random_trig_polynomial,
)
from uclab.quadrature import (
    LogCarleman,
    PlainPower,
    PowerCarleman,
    QuadratureParams,
    annulus_nodes,
    annulus_weighted_integral,
    ball_norm_sq,
    ball_norm_sq_log,
    doubling_ratio,
    phi_beta,
)


def indicial_ball_exact(n, sigma, l, R):
    """||r^sigma Y_l||^2 over B_R for the max-modulus-1 harmonics used here."""
    if n == 2:
        ang = math.pi if l >= 1 else 2 * math.pi
    else:
        # closed form available only for the zonal sector (value 1 at poles)
        ang = 4 * math.pi / (2 * l + 1)
    return R ** (2 * sigma + n) / (2 * sigma + n) * ang


def test_constant_disk_norm():
    u = power_radial(2, 0.0)
    got = ball_norm_sq(u, 0.5)
    assert math.isclose(got, math.pi / 4, rel_tol=1e-12)


def test_harmonic_l1_unit_disk():
    u = harmonic_polynomial(2, 1)
    got = ball_norm_sq(u, 1.0)
    assert math.isclose(got, math.pi / 4, rel_tol=1e-12)


@pytest.mark.parametrize(
    "sigma,l,R",
    [(1.5, 2, 0.7), (2.5, 1, 0.35), (3.5, 0, 1.0), (0.6, 4, 0.9)],
)
def test_indicial_ball_norms_2d(sigma, l, R):
    u, _ = make_indicial(2, sigma, l)
    got = ball_norm_sq(u, R)
    want = indicial_ball_exact(2, sigma, l, R)
    assert math.isclose(got, want, rel_tol=1e-9)
    # frozen spot value for one case
    if (sigma, l, R) == (1.5, 2, 0.7):
        assert math.isclose(got, 0.10560149545776727, rel_tol=1e-10)


@pytest.mark.parametrize("sigma,l,R", [(2.5, 3, 0.9), (2.0, 2, 0.5), (1.5, 0, 1.0)])
def test_zonal_ball_norms_3d(sigma, l, R):
    u, _ = make_indicial(3, sigma, l, index=0)
    got = ball_norm_sq(u, R)
    want = indicial_ball_exact(3, sigma, l, R)
    assert math.isclose(got, want, rel_tol=1e-9)
    if (sigma, l, R) == (2.5, 3, 0.9):
        assert math.isclose(got, 0.0965966160390925, rel_tol=1e-10)


@pytest.mark.parametrize(
    "n,sigma,l,index,r",
    [(2, 2.5, 1, 0, 0.01), (2, 1.5, 3, 1, 0.2), (3, 1.5, 1, 2, 0.05), (3, 2.0, 2, 1, 0.1)],
)
def test_doubling_ratio_homogeneous(n, sigma, l, index, r):
    # homogeneity forces ||u||^2(2r)/||u||^2(r) = 2^(2 sigma + n) at any radius
    u, _ = make_indicial(n, sigma, l, index=index)
    got = doubling_ratio(u, r)
    assert math.isclose(got, 2.0 ** (2 * sigma + n), rel_tol=1e-9)


def test_tail_extrapolation_consistent_across_cutoffs():
    u, _ = make_indicial(2, 1.5, 1)
    want = indicial_ball_exact(2, 1.5, 1, 0.8)
    for fac in (1e-8, 1e-4):
        got = ball_norm_sq(u, 0.8, QuadratureParams(r_min_factor=fac))
        assert math.isclose(got, want, rel_tol=1e-10)


def test_plain_power_annulus_closed_form():
    u = power_radial(2, 1.0)
    a, b = 0.25, 0.75
    got = annulus_weighted_integral(u, a, b, PlainPower(-6.0), order=0)
    want = math.pi * (a**-2 - b**-2)
    assert math.isclose(got.linear, want, rel_tol=1e-12)


def test_power_carleman_weight_exponent():
    # PowerCarleman(m, k) must integrate like r^(-2m+2k-n)
    u = power_radial(2, 2.0)
    a, b = 0.5, 1.0
    m, k = 2.5, 1
    got = annulus_weighted_integral(u, a, b, PowerCarleman(m, k), order=0)
    # integrand r^4 * r^(-2m+2k-2) * r dr dtheta = r^(3 - 2m + 2k) dr
    q = 4 - 2 * m + 2 * k
    want = 2 * math.pi * (b**q - a**q) / q
    assert math.isclose(got.linear, want, rel_tol=1e-12)


def test_log_carleman_against_erfi():
    beta = 2.0
    a, b = 0.1, 0.5
    u = power_radial(2, 0.0)
    got = annulus_weighted_integral(u, a, b, LogCarleman(beta, power=-2.0), order=0)
    # reduces to 2 pi * int exp(beta t^2) dt over [log a, log b]
    anti = lambda t: math.sqrt(math.pi) / (2 * math.sqrt(beta)) * erfi(math.sqrt(beta) * t)
    want = 2 * math.pi * (anti(math.log(b)) - anti(math.log(a)))
    assert math.isclose(got.linear, want, rel_tol=1e-11)


def test_phi_beta_spot_value():
    assert math.isclose(phi_beta(math.exp(-1.0), 2.0), math.e, rel_tol=1e-15)
    assert math.isclose(phi_beta(math.exp(-1.0), 2.0) ** 2, 7.38905609893065, rel_tol=1e-12)


def test_huge_carleman_weight_stays_in_log_space():
    u = harmonic_polynomial(2, 1)
    got = annulus_weighted_integral(u, 0.04, 0.6, LogCarleman(256.0, power=-2.0), order=0)
    assert math.isfinite(got.log)
    assert got.log > 2000.0
    assert got.linear == math.inf  # linear value overflows by design


def test_weight_overflow_guard():
    nodes = annulus_nodes(2, 0.1, 1.0)
    with pytest.raises(WeightOverflow):
        nodes.integrate_log(np.full(nodes.pts.shape[0], np.inf))


def test_refinement_invariance():
    base = QuadratureParams()
    fine = base.refined(2)
    fields = [
        harmonic_polynomial(2, 8),
        random_trig_polynomial(2, np.random.default_rng(11)),
        make_indicial(3, 2.5, 2, index=3)[0],
    ]
    for u in fields:
        a = ball_norm_sq_log(u, 0.7, base)
        b = ball_norm_sq_log(u, 0.7, fine)
        assert abs(a - b) < 1e-9
    u = harmonic_polynomial(2, 3)
    a = annulus_weighted_integral(u, 0.05, 0.6, LogCarleman(64.0, power=-2.0), order=1, params=base)
    b = annulus_weighted_integral(u, 0.05, 0.6, LogCarleman(64.0, power=-2.0), order=1, params=fine)
    assert abs(a.log - b.log) < 1e-9


def test_independent_adaptive_quadrature_cross_check():
    from scipy.integrate import dblquad

    u = random_trig_polynomial(2, np.random.default_rng(21), terms=3, max_wavenumber=2)
    a, b = 0.3, 0.8
    got = annulus_weighted_integral(u, a, b, PlainPower(-1.0), order=0).linear

    def integrand(theta, r):
        x = np.array([[r * math.cos(theta), r * math.sin(theta)]])
        return float(u.value(x)[0] ** 2) / r * r

    want, err = dblquad(integrand, a, b, 0.0, 2 * math.pi, epsabs=1e-11, epsrel=1e-11)
    assert math.isclose(got, want, rel_tol=1e-8)


def test_non_integrable_singularity_rejected():
    with pytest.raises(NonIntegrable):
        ball_norm_sq(power_radial(2, -1.0), 0.5)
    # just inside the integrable range works
    val = ball_norm_sq(power_radial(2, -0.99), 0.5)
    assert math.isclose(val, 2 * math.pi * 0.5**0.02 / 0.02, rel_tol=1e-9)


def test_degenerate_annulus_rejected():
    u = power_radial(2, 1.0)
    with pytest.raises(DegenerateAnnulus):
        annulus_weighted_integral(u, 0.5, 0.5, PlainPower(0.0))
    with pytest.raises(DegenerateAnnulus):
        annulus_weighted_integral(u, 0.0, 0.5, PlainPower(0.0))


def test_grid_field_ball_norm_clips_to_domain():
    base, _ = make_indicial(2, 2.5, 1)
    r = np.exp(np.linspace(np.log(0.05), np.log(1.0), 129))
    th = np.linspace(0, 2 * np.pi, 128, endpoint=False)
    R, TH = np.meshgrid(r, th, indexing="ij")
    pts = np.stack([R * np.cos(TH), R * np.sin(TH)], -1)
    g = GridField(r, th, base.value(pts))
    got = ball_norm_sq(g, 0.5)
    want = indicial_ball_exact(2, 2.5, 1, 0.5) - indicial_ball_exact(2, 2.5, 1, 0.05)
    assert math.isclose(got, want, rel_tol=2e-3)


def test_zero_ball_when_support_misses_region():
    u = harmonic_polynomial(2, 2)
    u.support = (0.5, 0.9)
    assert ball_norm_sq_log(u, 0.4) == -math.inf
