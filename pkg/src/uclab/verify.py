"""Numerical checks of the three-sphere, vanishing-order, and doubling bounds.

Each check produces a VerificationRecord with margin = rhs_log - lhs_log, so
margin >= 0 means the inequality held.  Negative margins are recorded, not
thrown: they distinguish miscalibrated constants from quadrature failures.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import (
    PipelineConfig,
    PipelineResult,
    ThreeSphereConstants,
    three_sphere_constants,
    vanishing_order_pipeline,
)
from .errors import (
    InsufficientDecay,
    InvalidRatios,
    RadiusTooLarge,
    ZeroNorm,
    ZeroSolution,
)
from .fields import SolutionField, harmonic_polynomial, make_indicial
from .quadrature import QuadratureParams, ball_norm_sq_log

__all__ = [
    "SphereTriple",
    "VerificationRecord",
    "check_three_sphere",
    "estimate_vanishing_order",
    "check_doubling",
    "measure_norm_ratio",
    "OrderBoundReport",
    "order_bound_consistency",
    "builtin_families",
    "three_sphere_suite",
    "calibrate_C0",
    "doubling_suite",
    "vanishing_order_records",
    "write_verification_csv",
]


@dataclass(frozen=True)
class SphereTriple:
    """Radii 0 < r1 < r2 < r3 with the middle ratio r2/r3 <= 1/4."""

    r1: float
    r2: float
    r3: float

    def __post_init__(self):
        if not (0.0 < self.r1 < self.r2 < self.r3):
            raise InvalidRatios(f"need 0 < r1 < r2 < r3, got {(self.r1, self.r2, self.r3)}")
        if self.r2 / self.r3 > 0.25:
            raise InvalidRatios(f"need r2/r3 <= 1/4, got {self.r2 / self.r3}")

    @property
    def ratios(self) -> tuple[float, float]:
        return (self.r1 / self.r3, self.r2 / self.r3)

    def scaled(self, s: float) -> "SphereTriple":
        return SphereTriple(s * self.r1, s * self.r2, s * self.r3)


@dataclass(frozen=True)
class VerificationRecord:
    check: str
    field_name: str
    radii: tuple[float, float, float]
    lhs_log: float
    rhs_log: float
    margin: float
    metadata: dict = field(default_factory=dict, compare=False)


def _resolution_meta(params: QuadratureParams) -> dict:
    return {
        "panels_per_decade": params.panels_per_decade,
        "ntheta": params.ntheta,
        "gauss_order": params.gauss_order,
    }


def check_three_sphere(
    u: SolutionField,
    triple: SphereTriple,
    consts: ThreeSphereConstants,
    params: QuadratureParams | None = None,
) -> VerificationRecord:
    """Margin of I(r2) <= C I(r1)^tau I(r3)^(1-tau) in natural log.

    lhs_log = log I(r2); rhs_log = log C + tau log I(r1) + (1-tau) log I(r3).
    """
    params = params or QuadratureParams()
    n1 = ball_norm_sq_log(u, triple.r1, params)
    n2 = ball_norm_sq_log(u, triple.r2, params)
    n3 = ball_norm_sq_log(u, triple.r3, params)
    if n1 == -math.inf and n2 > -math.inf:
        raise ZeroNorm(
            f"{u.name}: zero norm on the inner ball with nonzero middle norm "
            "falsifies the bound for every finite constant"
        )
    rhs = consts.log_C + consts.tau * n1 + (1.0 - consts.tau) * n3
    meta = _resolution_meta(params)
    meta["constants"] = f"tau={consts.tau!r},C={consts.C!r}"
    meta["log_base"] = "e"
    return VerificationRecord(
        check="three-sphere",
        field_name=u.name,
        radii=(triple.r1, triple.r2, triple.r3),
        lhs_log=n2,
        rhs_log=float(rhs),
        margin=float(rhs - n2),
        metadata=meta,
    )


def estimate_vanishing_order(
    u: SolutionField,
    radii,
    params: QuadratureParams | None = None,
) -> float:
    """Least-squares slope of log of the ball norm squared against log R.

    For u with leading behavior r^sigma the slope is 2 sigma + n.  Radii must
    be given in descending order, at least 8 of them spanning >= 2 decades.
    """
    params = params or QuadratureParams()
    rs = [float(r) for r in radii]
    if len(rs) < 8:
        raise ValueError("need at least 8 radii for a slope fit")
    if any(b >= a for a, b in zip(rs, rs[1:])):
        raise ValueError("radii must be strictly descending")
    if rs[0] / rs[-1] < 100.0:
        raise ValueError("radii must span at least two decades")
    logs = np.array([ball_norm_sq_log(u, r, params) for r in rs])
    if np.any(np.isinf(logs)):
        raise InsufficientDecay(f"{u.name}: ball norm vanished inside the fit window")
    return float(np.polyfit(np.log(rs), logs, 1)[0])


def check_doubling(
    u: SolutionField,
    r: float,
    log2_C3: float,
    R3: float,
    params: QuadratureParams | None = None,
) -> VerificationRecord:
    """Margin of I(2r) <= C3 I(r) in log base 2: log2 C3 - log2(I(2r)/I(r))."""
    params = params or QuadratureParams()
    if r <= 0:
        raise ValueError("radius must be positive")
    if r > R3:
        raise RadiusTooLarge(f"doubling is asserted only for r <= R3 = {R3:g}, got {r:g}")
    num = ball_norm_sq_log(u, 2.0 * r, params)
    den = ball_norm_sq_log(u, r, params)
    if den == -math.inf:
        raise ZeroNorm(f"{u.name}: zero norm on the inner doubling ball")
    lhs = (num - den) / math.log(2.0)
    meta = _resolution_meta(params)
    meta["log_base"] = "2"
    return VerificationRecord(
        check="doubling",
        field_name=u.name,
        radii=(r, 2.0 * r, R3),
        lhs_log=float(lhs),
        rhs_log=float(log2_C3),
        margin=float(log2_C3 - lhs),
        metadata=meta,
    )


def measure_norm_ratio(
    u: SolutionField, R0: float, params: QuadratureParams | None = None
) -> float:
    """rho = I(R0^2) / I(R0^4), the norm ratio driving the recursion."""
    if not (0.0 < R0 < 1.0):
        raise ValueError("R0 must lie in (0, 1)")
    params = params or QuadratureParams()
    outer = ball_norm_sq_log(u, R0**2, params)
    inner = ball_norm_sq_log(u, R0**4, params)
    if inner == -math.inf or outer == -math.inf:
        raise ZeroSolution(f"{u.name}: vanishes on a measurement ball")
    return math.exp(outer - inner)


@dataclass(frozen=True)
class OrderBoundReport:
    field_name: str
    rho: float
    slope: float
    m1: float
    consistent: bool
    pipeline: PipelineResult


def order_bound_consistency(
    u: SolutionField,
    cfg: PipelineConfig | None = None,
    params: QuadratureParams | None = None,
    num_radii: int = 12,
) -> OrderBoundReport:
    """Measured vanishing order against the recursion bound m1.

    rho is measured on the balls R0^2 and R0^4, the slope over the same
    window; consistency means slope <= m1.
    """
    cfg = cfg or PipelineConfig()
    params = params or QuadratureParams()
    rho = measure_norm_ratio(u, cfg.R0, params)
    result = vanishing_order_pipeline(cfg, rho)
    radii = np.geomspace(cfg.R0**2, cfg.R0**4, num_radii)
    slope = estimate_vanishing_order(u, radii, params)
    return OrderBoundReport(
        field_name=u.name,
        rho=rho,
        slope=slope,
        m1=result.m1,
        consistent=slope <= result.m1 + 1e-9,
        pipeline=result,
    )


# ------------------------------------------------------------------- suites

def builtin_families(n: int = 2) -> list[SolutionField]:
    """Harmonic degrees 1..8 plus indicial fields, the default check suite."""
    fields: list[SolutionField] = [harmonic_polynomial(n, l) for l in range(1, 9)]
    for sigma in (1.5, 2.5, 3.5):
        for l in (0, 1, 2):
            fields.append(make_indicial(n, sigma, l)[0])
    return fields


def three_sphere_suite(
    fields: list[SolutionField],
    R0s: tuple[float, ...] = (1.0 / 32.0, 1.0 / 64.0),
    n: int = 2,
    C0: float = 2.0,
    beta0: float = 1.0,
    params: QuadratureParams | None = None,
) -> list[VerificationRecord]:
    """Records for every field at the triples (R0^4, R0^2, 1)."""
    out = []
    for R0 in R0s:
        consts = three_sphere_constants(R0**4, R0**2, n=n, C0=C0, beta0=beta0)
        triple = SphereTriple(R0**4, R0**2, 1.0)
        for u in fields:
            out.append(check_three_sphere(u, triple, consts, params))
    return out


def calibrate_C0(
    fields: list[SolutionField],
    R0s: tuple[float, ...] = (1.0 / 32.0, 1.0 / 64.0),
    n: int = 2,
    beta0: float = 1.0,
    max_exponent: int = 10,
    params: QuadratureParams | None = None,
) -> float:
    """Smallest power of 2 for C0 making every suite margin nonnegative.

    C0 must exceed 1, so the search starts at 2.  Raises if 2^max_exponent
    still leaves a negative margin.
    """
    for k in range(1, max_exponent + 1):
        C0 = float(2**k)
        records = three_sphere_suite(fields, R0s, n=n, C0=C0, beta0=beta0, params=params)
        if all(rec.margin >= 0.0 for rec in records):
            return C0
    raise AssertionError(f"no C0 <= 2^{max_exponent} closes the three-sphere margins")


def doubling_suite(
    fields: list[SolutionField],
    log2_C3: float,
    R3: float,
    factors: tuple[float, ...] = (1.0, 0.5, 0.25),
    params: QuadratureParams | None = None,
) -> list[VerificationRecord]:
    return [
        check_doubling(u, f * R3, log2_C3, R3, params)
        for u in fields
        for f in factors
    ]


def vanishing_order_records(
    fields: list[SolutionField],
    cfg: PipelineConfig | None = None,
    params: QuadratureParams | None = None,
) -> list[VerificationRecord]:
    """Order-bound records: lhs = measured slope, rhs = pipeline m1."""
    cfg = cfg or PipelineConfig()
    out = []
    for u in fields:
        rep = order_bound_consistency(u, cfg, params)
        out.append(
            VerificationRecord(
                check="vanishing-order",
                field_name=u.name,
                radii=(cfg.R0**4, cfg.R0**2, 1.0),
                lhs_log=rep.slope,
                rhs_log=rep.m1,
                margin=rep.m1 - rep.slope,
                metadata={"rho": rep.rho, "s": rep.pipeline.s, "j1": rep.pipeline.j1},
            )
        )
    return out


def write_verification_csv(records: list[VerificationRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["check", "field", "r1", "r2", "r3", "lhs_log", "rhs_log", "margin"])
        for rec in records:
            w.writerow(
                [rec.check, rec.field_name]
                + [f"{r:.17g}" for r in rec.radii]
                + [f"{rec.lhs_log:.17g}", f"{rec.rhs_log:.17g}", f"{rec.margin:.17g}"]
            )
