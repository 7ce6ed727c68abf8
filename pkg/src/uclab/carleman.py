"""Carleman estimates with logarithmic and power weights, plus Caccioppoli ratios.

The estimates are inequalities for compactly supported fields; this module
measures their empirical constants (lhs/rhs ratios) over a corpus of cutoff
products of exact solutions.  Weights are handled in log space throughout;
see quadrature.py.
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass

import numpy as np

from .errors import (
    EvaluationAtOrigin,
    NotHalfInteger,
    UnsupportedField,
    ZeroRHS,
)
from .fields import (
    EllipticOperator,
    SolutionField,
    apply_operator,
    harmonic_polynomial,
    make_indicial,
    power_radial,
    random_trig_polynomial,
)
from .quadrature import (
    LogCarleman,
    NodeSet,
    PlainPower,
    QuadratureParams,
    annulus_nodes,
    annulus_weighted_integral,
    derivative_sq_log,
)

__all__ = [
    "CORPUS_PARAMS",
    "smoothstep_c2",
    "RadialCutoff",
    "annulus_cutoff",
    "inner_cutoff",
    "CompactField",
    "CorpusSpec",
    "build_corpus",
    "CarlemanReport",
    "log_weight_estimate",
    "power_weight_estimate",
    "caccioppoli_check",
    "log_weight_sweep",
    "power_weight_sweep",
    "stability_summary",
    "write_carleman_csv",
]


# Cutoff ramps are as narrow as log(3/e) ~ 0.1 in log r, regardless of scale;
# the slope-based panel rule alone would leave a whole ramp inside one Gauss
# panel (seen as ~16% error), so this module defaults to a density that
# resolves the ramps to ~1e-12.
CORPUS_PARAMS = QuadratureParams(panels_per_decade=128)


# ----------------------------------------------------------------- smoothstep

def _bump(t: np.ndarray):
    """exp(-1/t) with first and second derivatives, zero for t <= 0."""
    t = np.asarray(t, dtype=float)
    f = np.zeros_like(t)
    f1 = np.zeros_like(t)
    f2 = np.zeros_like(t)
    m = t > 0
    tm = t[m]
    e = np.exp(-1.0 / tm)
    f[m] = e
    f1[m] = e / tm**2
    f2[m] = e * (1.0 / tm**4 - 2.0 / tm**3)
    return f, f1, f2


def smoothstep_c2(t):
    """C-infinity step S = f(t)/(f(t)+f(1-t)) with S', S''; 0 below 0, 1 above 1."""
    t = np.asarray(t, dtype=float)
    S = np.zeros_like(t)
    S1 = np.zeros_like(t)
    S2 = np.zeros_like(t)
    S[t >= 1.0] = 1.0
    m = (t > 0.0) & (t < 1.0)
    tm = t[m]
    f, fp, fpp = _bump(tm)
    g, gp_raw, gpp_raw = _bump(1.0 - tm)
    gp = -gp_raw            # d/dt f(1-t)
    gpp = gpp_raw
    D = f + g
    N = fp * g - f * gp
    Dp = fp + gp
    Np = fpp * g - f * gpp
    S[m] = f / D
    S1[m] = N / D**2
    S2[m] = (Np * D - 2.0 * N * Dp) / D**3
    return S, S1, S2


class RadialCutoff:
    """Radial profile: 0, smooth rise on one band, 1, smooth fall on another, 0.

    ``scales`` are the reference radii (one per band) against which the
    measured derivative magnitudes K_alpha are normalized:
    |d^k xi| <= K_k * scale^-k on the corresponding band.
    """

    def __init__(self, rise: tuple[float, float], fall: tuple[float, float], scales: tuple[float, float], name: str = "cutoff"):
        a, b = rise
        c, d = fall
        if not (0.0 < a < b <= c < d):
            raise ValueError("cutoff bands must satisfy 0 < rise < plateau < fall")
        self.rise = (float(a), float(b))
        self.fall = (float(c), float(d))
        self.scales = (float(scales[0]), float(scales[1]))
        self.support = (float(a), float(d))
        self.name = name
        self._kalpha: dict[int, float] | None = None

    @property
    def bands(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (self.rise, self.fall)

    def profile(self, s):
        """xi(s), xi'(s), xi''(s) for radii s (vectorized)."""
        s = np.asarray(s, dtype=float)
        xi = np.zeros_like(s)
        d1 = np.zeros_like(s)
        d2 = np.zeros_like(s)
        a, b = self.rise
        c, d = self.fall
        xi[(s >= b) & (s <= c)] = 1.0
        m = (s > a) & (s < b)
        if np.any(m):
            w = b - a
            S, S1, S2 = smoothstep_c2((s[m] - a) / w)
            xi[m] = S
            d1[m] = S1 / w
            d2[m] = S2 / w**2
        m = (s > c) & (s < d)
        if np.any(m):
            w = d - c
            S, S1, S2 = smoothstep_c2((d - s[m]) / w)
            xi[m] = S
            d1[m] = -S1 / w
            d2[m] = S2 / w**2
        return xi, d1, d2

    def derivative_scales(self, samples: int = 2001) -> dict[int, float]:
        """Measured K_alpha with |D^alpha xi| <= K_alpha scale^-|alpha| per band.

        Covers Cartesian derivatives up to order 2: the Hessian entries of a
        radial function are bounded by max(|xi''|, |xi'|/s).
        """
        if self._kalpha is not None:
            return self._kalpha
        out = {0: 1.0, 1: 0.0, 2: 0.0}
        for (a, b), scale in zip(self.bands, self.scales):
            s = np.linspace(a, b, samples)
            _, d1, d2 = self.profile(s)
            out[1] = max(out[1], float(np.max(np.abs(d1))) * scale)
            out[2] = max(
                out[2],
                float(max(np.max(np.abs(d2)), np.max(np.abs(d1) / s))) * scale**2,
            )
        self._kalpha = out
        return out


def annulus_cutoff(r1: float, r2: float) -> RadialCutoff:
    """1 on [r1/2, e r2], supported in (r1/e, 3 r2)."""
    if not (0.0 < r1 < r2):
        raise ValueError("need 0 < r1 < r2")
    return RadialCutoff(
        rise=(r1 / math.e, r1 / 2.0),
        fall=(math.e * r2, 3.0 * r2),
        scales=(r1, r2),
        name=f"xi({r1:g},{r2:g})",
    )


def inner_cutoff(delta: float, outer: float) -> RadialCutoff:
    """1 on [delta/2, outer], supported in (delta/3, 2 outer)."""
    if not (0.0 < delta / 2.0 < outer):
        raise ValueError("need 0 < delta/2 < outer")
    return RadialCutoff(
        rise=(delta / 3.0, delta / 2.0),
        fall=(outer, 2.0 * outer),
        scales=(delta, outer),
        name=f"chi({delta:g},{outer:g})",
    )


class CompactField(SolutionField):
    """Product xi(|x|) u(x): compactly supported away from the origin."""

    def __init__(self, base: SolutionField, cutoff: RadialCutoff, name: str | None = None):
        self.base = base
        self.cutoff = cutoff
        self.n = base.n
        self.name = name or f"{base.name}*{cutoff.name}"
        self.support = cutoff.support
        self.domain = base.domain
        self.radial_exponent = base.radial_exponent

    def _radii(self, pts: np.ndarray) -> np.ndarray:
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        if np.any(r == 0.0):
            raise EvaluationAtOrigin("cutoff product undefined at the origin")
        return r

    def value(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        r = self._radii(pts)
        xi, _, _ = self.cutoff.profile(r)
        return xi * self.base.value(pts)

    def gradient(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        r = self._radii(pts)
        xi, d1, _ = self.cutoff.profile(r)
        xhat = pts / r[..., None]
        return xi[..., None] * self.base.gradient(pts) + (d1 * self.base.value(pts))[
            ..., None
        ] * xhat

    def hessian(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        r = self._radii(pts)
        xi, d1, d2 = self.cutoff.profile(r)
        xhat = pts / r[..., None]
        u = self.base.value(pts)
        g = self.base.gradient(pts)
        H = self.base.hessian(pts)
        eye = np.eye(self.n)
        sym = xhat[..., :, None] * g[..., None, :] + g[..., :, None] * xhat[..., None, :]
        rad = xhat[..., :, None] * xhat[..., None, :]
        return (
            xi[..., None, None] * H
            + d1[..., None, None] * sym
            + (u * d2)[..., None, None] * rad
            + (u * d1 / r)[..., None, None] * (eye - rad)
        )


# -------------------------------------------------------------------- corpus

@dataclass(frozen=True)
class CorpusSpec:
    """Recipe for the estimate-verification corpus (12 members by default)."""

    n: int = 2
    r1: float = 0.1
    r2: float = 0.2
    harmonic_degrees: tuple[int, ...] = (1, 2, 3, 4)
    indicial: tuple[tuple[float, int], ...] = ((1.5, 0), (1.5, 1), (2.5, 0), (2.5, 1))
    num_trig: int = 3
    trig_terms: int = 4
    trig_max_wavenumber: int = 3
    seed: int = 42


def build_corpus(spec: CorpusSpec | None = None) -> list[CompactField]:
    spec = spec or CorpusSpec()
    cut = annulus_cutoff(spec.r1, spec.r2)
    members: list[SolutionField] = [power_radial(spec.n, 0.0)]
    members[0].name = "const"
    for l in spec.harmonic_degrees:
        members.append(harmonic_polynomial(spec.n, l))
    for sigma, l in spec.indicial:
        members.append(make_indicial(spec.n, sigma, l)[0])
    rng = np.random.default_rng(spec.seed)
    for k in range(spec.num_trig):
        members.append(
            random_trig_polynomial(
                spec.n, rng, terms=spec.trig_terms,
                max_wavenumber=spec.trig_max_wavenumber, name=f"trig{k + 1}",
            )
        )
    return [CompactField(u, cut) for u in members]


# ------------------------------------------------------------------- reports

@dataclass(frozen=True)
class CarlemanReport:
    """One measured inequality instance; ratio = exp(lhs_log - rhs_log)."""

    estimate: str
    member: str
    param: float
    lhs_log: float
    rhs_log: float
    ratio: float


def _require_compact(u: SolutionField) -> tuple[float, float]:
    if u.support is None or u.support[0] <= 0.0:
        raise UnsupportedField(
            f"{u.name}: weighted estimates need compact support away from 0"
        )
    return u.support


class _MemberTables:
    """Field quantities evaluated once on a shared node set for weight sweeps."""

    def __init__(self, u: SolutionField, nodes: NodeSet, op: EllipticOperator):
        self.u = u
        self.nodes = nodes
        self.log_u2 = derivative_sq_log(u, nodes.pts, 0)
        self.log_g2 = derivative_sq_log(u, nodes.pts, 1)
        self.log_h2 = derivative_sq_log(u, nodes.pts, 2)
        with np.errstate(divide="ignore"):
            self.log_P2 = 2.0 * np.log(np.abs(apply_operator(op, u, nodes.pts)))
            self.log_lap2 = 2.0 * np.log(
                np.abs(np.trace(u.hessian(nodes.pts), axis1=-2, axis2=-1))
            )


def _log_weight_report(tab: _MemberTables, beta: float, n: int, weight_beta: float) -> CarlemanReport:
    t = tab.nodes.t
    phi2 = LogCarleman(weight_beta).log_weight_t(t, n)
    I1 = tab.nodes.integrate_log(phi2 - n * t + tab.log_u2).log
    I2 = tab.nodes.integrate_log(phi2 + (2.0 - n) * t + tab.log_g2).log
    rhs = tab.nodes.integrate_log(phi2 + (4.0 - n) * t + tab.log_P2).log
    lhs = np.logaddexp(3.0 * math.log(beta) + I1, math.log(beta) + I2)
    if rhs == -math.inf:
        raise ZeroRHS(f"{tab.u.name}: P u vanishes on the support")
    return CarlemanReport(
        estimate="log", member=tab.u.name, param=beta,
        lhs_log=float(lhs), rhs_log=float(rhs), ratio=math.exp(float(lhs) - float(rhs)),
    )


def _power_weight_report(tab: _MemberTables, m: float, n: int) -> CarlemanReport:
    if m <= 0 or round(2 * m) != 2 * m or int(round(2 * m)) % 2 == 0:
        raise NotHalfInteger(f"power weight exponent must be in N + 1/2, got {m}")
    t = tab.nodes.t
    parts = []
    for k, logq in enumerate((tab.log_u2, tab.log_g2, tab.log_h2)):
        w = (-2.0 * m + 2.0 * k - n) * t
        Ik = tab.nodes.integrate_log(w + logq).log
        parts.append((2.0 - 2.0 * k) * math.log(m) + Ik)
    lhs = np.logaddexp.reduce(parts)
    rhs = tab.nodes.integrate_log((-2.0 * m + 4.0 - n) * t + tab.log_lap2).log
    if rhs == -math.inf:
        raise ZeroRHS(f"{tab.u.name}: Laplacian vanishes on the support")
    return CarlemanReport(
        estimate="power", member=tab.u.name, param=m,
        lhs_log=float(lhs), rhs_log=float(rhs), ratio=math.exp(float(lhs) - float(rhs)),
    )


def _sweep_nodes(u: SolutionField, max_slope: float, params: QuadratureParams) -> NodeSet:
    lo, hi = _require_compact(u)
    return annulus_nodes(u.n, lo, hi, params, extra_slope=max_slope)


def log_weight_estimate(
    u: SolutionField,
    beta: float,
    params: QuadratureParams | None = None,
    op: EllipticOperator | None = None,
    weight_beta: float | None = None,
) -> CarlemanReport:
    """Measure beta^3 I(phi^2 r^-n u^2) + beta I(phi^2 r^(2-n) |grad u|^2)
    against I(phi^2 r^(4-n) (P u)^2), phi = phi_(weight_beta or beta).

    ``weight_beta`` freezes the weight while the prefactors follow beta; the
    default couples them as in the estimate itself.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    params = params or CORPUS_PARAMS
    op = op or EllipticOperator.laplacian(u.n)
    wb = beta if weight_beta is None else weight_beta
    lo, hi = _require_compact(u)
    slope = LogCarleman(wb, power=4.0 - u.n).slope_bound(math.log(lo), math.log(hi), u.n)
    tab = _MemberTables(u, annulus_nodes(u.n, lo, hi, params, extra_slope=slope), op)
    return _log_weight_report(tab, beta, u.n, wb)


def power_weight_estimate(
    u: SolutionField, m: float, params: QuadratureParams | None = None
) -> CarlemanReport:
    """Measure sum_k m^(2-2k) I(r^(-2m+2k-n) |D^k u|^2) against
    I(r^(-2m+4-n) |Delta u|^2) for half-integer m."""
    params = params or CORPUS_PARAMS
    lo, hi = _require_compact(u)
    slope = abs(-2.0 * m - u.n) + 4.0
    tab = _MemberTables(
        u, annulus_nodes(u.n, lo, hi, params, extra_slope=slope), EllipticOperator.laplacian(u.n)
    )
    return _power_weight_report(tab, m, u.n)


def log_weight_sweep(
    corpus: list[SolutionField],
    betas: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0),
    params: QuadratureParams | None = None,
    op: EllipticOperator | None = None,
) -> list[CarlemanReport]:
    """All (member, beta) reports; field quantities evaluated once per member."""
    params = params or CORPUS_PARAMS
    out = []
    for u in corpus:
        op_u = op or EllipticOperator.laplacian(u.n)
        lo, hi = _require_compact(u)
        slope = LogCarleman(max(betas), power=4.0 - u.n).slope_bound(
            math.log(lo), math.log(hi), u.n
        )
        tab = _MemberTables(u, annulus_nodes(u.n, lo, hi, params, extra_slope=slope), op_u)
        for beta in betas:
            out.append(_log_weight_report(tab, beta, u.n, beta))
    return out


def power_weight_sweep(
    corpus: list[SolutionField],
    ms: tuple[float, ...] = tuple(k + 0.5 for k in range(1, 21)),
    params: QuadratureParams | None = None,
) -> list[CarlemanReport]:
    params = params or CORPUS_PARAMS
    out = []
    for u in corpus:
        lo, hi = _require_compact(u)
        slope = abs(-2.0 * max(ms) - u.n) + 4.0
        tab = _MemberTables(
            u, annulus_nodes(u.n, lo, hi, params, extra_slope=slope),
            EllipticOperator.laplacian(u.n),
        )
        for m in ms:
            out.append(_power_weight_report(tab, m, u.n))
    return out


def caccioppoli_check(
    u: SolutionField,
    r: float,
    ratios: tuple[float, float, float, float] = (0.5, 1.0, 0.25, 2.0),
    params: QuadratureParams | None = None,
) -> CarlemanReport:
    """Interior-derivative ratio max_k r^(2k) I_k(A(a1 r, a2 r)) / I_0(A(a3 r, a4 r)),
    the max over derivative orders k <= 2.

    Scale-invariant for homogeneous fields; for exact solutions it estimates
    the Caccioppoli constant C'.
    """
    a1, a2, a3, a4 = ratios
    if not (0.0 < a3 < a1 < a2 < a4):
        raise ValueError("need enclosing annuli: a3 < a1 < a2 < a4")
    params = params or CORPUS_PARAMS
    parts = []
    for k in range(3):
        Ik = annulus_weighted_integral(u, a1 * r, a2 * r, PlainPower(0.0), order=k, params=params)
        parts.append(2.0 * k * math.log(r) + Ik.log)
    lhs = float(max(parts))
    rhs = annulus_weighted_integral(u, a3 * r, a4 * r, PlainPower(0.0), order=0, params=params).log
    if rhs == -math.inf:
        raise ZeroRHS(f"{u.name}: field vanishes on the comparison annulus")
    return CarlemanReport(
        estimate="caccioppoli", member=u.name, param=r,
        lhs_log=lhs, rhs_log=rhs, ratio=math.exp(lhs - rhs),
    )


def stability_summary(reports: list[CarlemanReport]) -> dict[str, dict[str, float]]:
    """Per estimate: max ratio, median ratio, and their quotient."""
    out: dict[str, dict[str, float]] = {}
    for name in sorted({rep.estimate for rep in reports}):
        ratios = [rep.ratio for rep in reports if rep.estimate == name]
        mx = max(ratios)
        med = statistics.median(ratios)
        out[name] = {"max": mx, "median": med, "max_over_median": mx / med}
    return out


def write_carleman_csv(reports: list[CarlemanReport], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["estimate", "member", "param", "lhs_log", "rhs_log", "ratio"])
        for rep in reports:
            w.writerow([
                rep.estimate, rep.member, f"{rep.param:.17g}",
                f"{rep.lhs_log:.17g}", f"{rep.rhs_log:.17g}", f"{rep.ratio:.17g}",
            ])
