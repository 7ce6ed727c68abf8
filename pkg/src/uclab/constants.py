"""Explicit constants: three-sphere inequality, vanishing-order recursion, doubling.

Everything here is closed-form arithmetic on configuration numbers; no
quadrature.  The recursion turns a measured norm ratio rho into a recursion
depth j1 and a doubling exponent log2(C3) valid on balls up to R3.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

from .errors import (
    AdmissibilityFailed,
    BoundsViolated,
    InvalidRatios,
    RatioNotAboveOne,
)

__all__ = [
    "R0_SAFE_MAX",
    "ThreeSphereConstants",
    "three_sphere_constants",
    "ACBounds",
    "pipeline_a_and_C",
    "growth_condition_holds",
    "PipelineConfig",
    "PipelineResult",
    "vanishing_order_pipeline",
    "doubling_constant",
    "config_to_json",
    "config_from_json",
    "result_to_dict",
    "result_to_json",
]

# Largest R0 with a <= -4 log R0; the root of a(R0) = -4 log R0,
# namely exp(-(3 + sqrt(10))/2).
R0_SAFE_MAX = math.exp(-(3.0 + math.sqrt(10.0)) / 2.0)


@dataclass(frozen=True)
class ThreeSphereConstants:
    """Interpolation data for ||u||(rho2) <= C^(1/2)-style three-sphere bounds.

    With I(rho) the squared norm on the ball of radius rho (outer radius
    normalized to 1):  I(rho2) <= C * I(rho1)^tau * I(1)^(1-tau).
    """

    rho1: float
    rho2: float
    A: float
    B: float
    tau: float
    C: float

    @property
    def log_C(self) -> float:
        return math.log(self.C)


def three_sphere_constants(
    rho1: float, rho2: float, n: int = 2, C0: float = 2.0, beta0: float = 1.0
) -> ThreeSphereConstants:
    """Exponent tau and constant C for radii ratios (rho1, rho2, 1).

    A = (log rho1 - 1)^2 - (log rho2)^2,  B = -1 - 2 log rho2,
    tau = B / (A + B),  C = max(C0 (rho2/rho1)^n, exp(B beta0)).
    """
    if not (0.0 < rho1 < rho2 <= 0.25):
        raise InvalidRatios(f"need 0 < rho1 < rho2 <= 1/4, got ({rho1}, {rho2})")
    if C0 <= 1.0:
        raise ValueError("C0 must exceed 1")
    if beta0 < 1.0:
        raise ValueError("beta0 must be at least 1")
    A = (math.log(rho1) - 1.0) ** 2 - math.log(rho2) ** 2
    B = -1.0 - 2.0 * math.log(rho2)
    tau = B / (A + B)
    C = max(C0 * (rho2 / rho1) ** n, math.exp(B * beta0))
    if not (0.0 < tau < 1.0 and C > 1.0):
        raise AssertionError("derived constants left their guaranteed ranges")
    return ThreeSphereConstants(rho1=rho1, rho2=rho2, A=A, B=B, tau=tau, C=C)


class ACBounds(NamedTuple):
    a: float
    C: float
    bounds_ok: bool


def pipeline_a_and_C(
    R0: float, n: int = 2, C0: float = 2.0, beta0: float = 1.0
) -> ACBounds:
    """Recursion step constants at the radii (R0^4, R0^2, 1).

    a = A/B for that triple; C is its three-sphere constant.  bounds_ok
    reports the guaranteed window 2 < a <= -4 log R0 together with
    1 < C <= C0 R0^(-beta1), beta1 = max(2n, 4 beta0); the first part holds
    exactly when R0 <= R0_SAFE_MAX.
    """
    if not (0.0 < R0 < 1.0):
        raise InvalidRatios(f"need 0 < R0 < 1, got {R0}")
    if C0 <= 1.0:
        raise ValueError("C0 must exceed 1")
    L = math.log(R0)
    A = (4.0 * L - 1.0) ** 2 - (2.0 * L) ** 2
    B = -1.0 - 4.0 * L
    a = A / B
    C = max(C0 * R0 ** (-2 * n), math.exp(B * beta0))
    beta1 = max(2.0 * n, 4.0 * beta0)
    bounds_ok = (2.0 < a <= -4.0 * L) and (1.0 < C <= C0 * R0 ** (-beta1))
    return ACBounds(a=a, C=C, bounds_ok=bounds_ok)


def growth_condition_holds(R0: float, c: float, C0: float, beta1: float) -> bool:
    """Check 2 t mu > (t-1) log(4 mu) + log(log C0^3 + 3 beta1 mu) - log(c/4)
    for every integer t >= 1, with mu = -log R0.

    Both sides are affine in t, so the check reduces to t = 1 plus a slope
    comparison.  Requires mu > 1.
    """
    mu = -math.log(R0)
    if mu <= 1.0:
        raise ValueError("growth condition needs -log R0 > 1")
    if c <= 0 or C0 <= 1.0 or beta1 <= 0:
        raise ValueError("need c > 0, C0 > 1, beta1 > 0")
    slope_ok = 2.0 * mu > math.log(4.0 * mu)
    rhs_at_1 = math.log(3.0 * math.log(C0) + 3.0 * beta1 * mu) - math.log(c / 4.0)
    return slope_ok and (2.0 * mu > rhs_at_1)


@dataclass(frozen=True)
class PipelineConfig:
    """Inputs to the vanishing-order recursion.

    gamma scales the comparison radii R_j = 1/(gamma (j + 1/2)); c = 1/gamma.
    C1 and C2 bound the singular potential and drift; Cprime, Cpp and
    Ctilde_prime are the Caccioppoli and Carleman constants entering the
    admissibility checks and the doubling constant.
    """

    n: int = 2
    R0: float = 1.0 / 32.0
    gamma: float = 2.0
    j0: int = 2
    C0: float = 2.0
    beta0: float = 1.0
    Ctilde_prime: float = 1.0
    Cpp: float = 1.0
    Cprime: float = 1.0
    C1: float = 0.0
    C2: float = 0.0

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if not (0.0 < self.R0 <= 1.0 / 16.0):
            raise ValueError("R0 must lie in (0, 1/16]")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.j0 < 0 or int(self.j0) != self.j0:
            raise ValueError("j0 must be a nonnegative integer")
        if self.C0 <= 1.0:
            raise ValueError("C0 must exceed 1")
        if self.beta0 < 1.0:
            raise ValueError("beta0 must be at least 1")
        if self.Ctilde_prime <= 0 or self.Cprime <= 0 or self.Cpp < 0:
            raise ValueError("Carleman/Caccioppoli constants must be positive")
        if self.C1 < 0 or self.C2 < 0:
            raise ValueError("lower-order bounds must be nonnegative")

    @property
    def c(self) -> float:
        return 1.0 / self.gamma

    @property
    def mu(self) -> float:
        return -math.log(self.R0)

    @property
    def beta1(self) -> float:
        return max(2.0 * self.n, 4.0 * self.beta0)

    def comparison_radius(self, j: float) -> float:
        return 1.0 / (self.gamma * (j + 0.5))


@dataclass(frozen=True)
class PipelineResult:
    """Everything the recursion produces, JSON-serializable via result_to_dict."""

    rho: float
    a: float
    C: float
    mu: float
    t0: float
    t0_clamped: bool
    s1: int
    s2: int | None
    s: int
    j1: int
    m1: float
    log2_C3: float
    R2: float
    R3: float
    r_j1: float
    r_j1_next: float
    growth_ok: bool
    bracket_ok: bool


def doubling_constant(m1: float, n: int, Ctilde_prime: float = 1.0) -> float:
    """log2 of the doubling constant C3 = 2^m1 (8 C~' + 2(m1-n)^2)/(m1-n)^2."""
    if m1 <= n:
        raise ValueError("m1 must exceed the dimension")
    if Ctilde_prime <= 0:
        raise ValueError("Ctilde_prime must be positive")
    d = m1 - n
    return m1 + math.log2((8.0 * Ctilde_prime + 2.0 * d * d) / (d * d))


def vanishing_order_pipeline(cfg: PipelineConfig, rho: float) -> PipelineResult:
    """Turn a measured norm ratio rho = I(R0^2)/I(R0^4) into recursion outputs.

    Produces the step count s, recursion depth j1, vanishing-order bound
    m1 = n + 2(j1 + 1/2), the doubling exponent log2(C3), and the certified
    radius range R3 = R0^(2s+2)/8.  Ties in the j1 bracketing
    R_(j1+1) < R0^(2s) <= R_(j1) resolve to the non-strict upper endpoint;
    a relative tolerance of a few ulps absorbs float noise in R0^(-2s).
    """
    if rho <= 1.0:
        raise RatioNotAboveOne(f"norm ratio must exceed 1, got {rho}")
    ac = pipeline_a_and_C(cfg.R0, cfg.n, cfg.C0, cfg.beta0)
    if not ac.bounds_ok:
        raise BoundsViolated(
            f"a = {ac.a:.6g} outside (2, {-4 * math.log(cfg.R0):.6g}]; "
            f"need R0 <= {R0_SAFE_MAX:.6g}"
        )
    growth_ok = growth_condition_holds(cfg.R0, cfg.c, cfg.C0, cfg.beta1)

    L = math.log(cfg.R0)
    t0 = (math.log(2.0) - math.log(ac.a * cfg.c) + math.log(math.log(rho))) / (
        -2.0 * L - math.log(ac.a)
    )
    ceil_t0 = math.ceil(t0)
    t0_clamped = ceil_t0 < 1
    s1 = max(1, ceil_t0)

    # step count: bump s1 until R0^(2s) enters the comparison range (R_j0 down)
    s2: int | None = None
    if cfg.R0 ** (2 * s1) <= cfg.comparison_radius(cfg.j0):
        s = s1
    else:
        s2 = s1 + 1
        while cfg.R0 ** (2 * s2) > cfg.comparison_radius(cfg.j0):
            s2 += 1
        s = s2

    X = cfg.R0 ** (-2 * s) / cfg.gamma
    j1 = max(cfg.j0, math.floor(X - 0.5 + 4e-15 * max(1.0, X)))
    tol = 1e-12
    r2s = cfg.R0 ** (2 * s)
    bracket_ok = (
        cfg.comparison_radius(j1 + 1) < r2s * (1.0 + tol)
        and r2s <= cfg.comparison_radius(j1) * (1.0 + tol)
    )

    m1 = cfg.n + 2.0 * (j1 + 0.5)
    m = j1 + 0.5
    failures = []
    if not (m * m / 2.0 > cfg.Cprime * cfg.C1**2):
        failures.append("m^2/2 <= Cprime C1^2")
    if not (1.0 - cfg.Cprime * cfg.C2**2 > 0.5):
        failures.append("1 - Cprime C2^2 <= 1/2")
    if not (1.0 / (math.sqrt(cfg.Cprime) * m) <= cfg.R0):
        failures.append("1/(sqrt(Cprime) m) > R0")
    if not (m * m >= cfg.Cpp):
        failures.append("m^2 < Cpp")
    if failures:
        raise AdmissibilityFailed("; ".join(failures))

    return PipelineResult(
        rho=rho,
        a=ac.a,
        C=ac.C,
        mu=cfg.mu,
        t0=t0,
        t0_clamped=t0_clamped,
        s1=s1,
        s2=s2,
        s=s,
        j1=j1,
        m1=m1,
        log2_C3=doubling_constant(m1, cfg.n, cfg.Ctilde_prime),
        R2=cfg.R0,
        R3=cfg.R0 ** (2 * s + 2) / 8.0,
        r_j1=cfg.comparison_radius(j1),
        r_j1_next=cfg.comparison_radius(j1 + 1),
        growth_ok=growth_ok,
        bracket_ok=bracket_ok,
    )


# ------------------------------------------------------------------ JSON I/O

_CONFIG_KEYS = (
    "n", "R0", "gamma", "j0", "C0", "beta0",
    "Ctilde_prime", "Cpp", "Cprime", "C1", "C2",
)


def config_to_json(cfg: PipelineConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump({k: getattr(cfg, k) for k in _CONFIG_KEYS}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_from_json(path) -> PipelineConfig:
    with open(path) as fh:
        raw = json.load(fh)
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return PipelineConfig(**raw)


def result_to_dict(res: PipelineResult) -> dict:
    return asdict(res)


def result_to_json(res: PipelineResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(result_to_dict(res), fh, indent=2, sort_keys=True)
        fh.write("\n")
