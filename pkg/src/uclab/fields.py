"""Solution fields with exact derivatives, and the elliptic operators acting on them.

A field knows its value, gradient, and Hessian at arbitrary points (vectorized
over a leading shape).  The analytic kinds carry closed-form derivatives so
downstream Carleman and three-sphere checks are not polluted by finite
difference error; grid fields differentiate their nodal data instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from ._homopoly import HomogeneousPolynomial, constant_poly, solid_harmonic
from .errors import (
    EvaluationAtOrigin,
    InvalidOrder,
    MissingHessian,
    UnsupportedField,
)

__all__ = [
    "SolutionField",
    "PowerSolidField",
    "TrigPolynomialField",
    "CustomField",
    "GridField",
    "EllipticOperator",
    "harmonic_polynomial",
    "make_indicial",
    "indicial_coupling",
    "power_radial",
    "random_trig_polynomial",
    "apply_operator",
    "inequality_residual",
    "grid_to_csv",
    "grid_from_csv",
]


def _pts(x, n: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0 or pts.shape[-1] != n:
        raise ValueError(f"points must have trailing dimension {n}")
    return pts


class SolutionField:
    """Base class: scalar field on R^n minus (possibly) the origin.

    Attributes
    ----------
    n : ambient dimension
    name : label used in reports and CSV output
    radial_exponent : sigma with |u| ~ r^sigma near 0, or None if unknown
    support : (lo, hi) radii outside which the field vanishes, or None
    domain : (lo, hi) radii between which the field is defined, or None
    """

    n: int
    name: str = "field"
    radial_exponent: float | None = None
    support: tuple[float, float] | None = None
    domain: tuple[float, float] | None = None

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x) -> np.ndarray:
        raise NotImplementedError

    def scaled(self, alpha: float) -> "SolutionField":
        base = self
        out = CustomField(
            self.n,
            value=lambda x: alpha * base.value(x),
            gradient=lambda x: alpha * base.gradient(x),
            hessian=lambda x: alpha * base.hessian(x),
            name=f"{self.name}*{alpha:g}",
            radial_exponent=self.radial_exponent,
        )
        out.support = self.support
        out.domain = self.domain
        return out

    def dilated(self, c: float) -> "SolutionField":
        """Composition u(c x); support and domain radii divide by c."""
        if c <= 0:
            raise ValueError("dilation factor must be positive")
        base = self
        out = CustomField(
            self.n,
            value=lambda x: base.value(c * _pts(x, base.n)),
            gradient=lambda x: c * base.gradient(c * _pts(x, base.n)),
            hessian=lambda x: c * c * base.hessian(c * _pts(x, base.n)),
            name=f"{self.name}({c:g}x)",
            radial_exponent=self.radial_exponent,
        )
        if self.support is not None:
            out.support = (self.support[0] / c, self.support[1] / c)
        if self.domain is not None:
            out.domain = (self.domain[0] / c, self.domain[1] / c)
        return out

    def rotated(self, Q) -> "SolutionField":
        """Composition u(Q x) for orthogonal Q; derivatives transform covariantly."""
        Q = np.asarray(Q, dtype=float)
        if Q.shape != (self.n, self.n):
            raise ValueError("rotation matrix has wrong shape")
        if not np.allclose(Q @ Q.T, np.eye(self.n), atol=1e-12):
            raise ValueError("matrix is not orthogonal")
        base = self
        out = CustomField(
            self.n,
            value=lambda x: base.value(_pts(x, base.n) @ Q.T),
            gradient=lambda x: base.gradient(_pts(x, base.n) @ Q.T) @ Q,
            hessian=lambda x: np.einsum(
                "ij,...jk,kl->...il", Q.T, base.hessian(_pts(x, base.n) @ Q.T), Q
            ),
            name=f"{self.name}∘Q",
            radial_exponent=self.radial_exponent,
        )
        out.support = self.support
        out.domain = self.domain
        return out


class PowerSolidField(SolutionField):
    """u(x) = |x|^s p(x) with p homogeneous of degree l, s = sigma - l.

    Covers harmonic polynomials (s = 0), indicial solutions of
    Delta u = c |x|^-2 u, and plain radial powers (l = 0).  Gradient and
    Hessian come from the product rule, so they are exact up to rounding.
    """

    def __init__(self, n: int, sigma: float, poly: HomogeneousPolynomial, name: str | None = None):
        if poly.n != n:
            raise ValueError("polynomial dimension mismatch")
        self.n = n
        self.sigma = float(sigma)
        self.l = poly.degree
        self.s = self.sigma - self.l
        self.poly = poly
        self.radial_exponent = self.sigma
        self.name = name or f"r^{self.s:g}*deg{self.l}"
        self._grad = [poly.differentiate(i) for i in range(n)]
        self._hess = [[self._grad[i].differentiate(j) for j in range(n)] for i in range(n)]

    def _r(self, pts: np.ndarray) -> np.ndarray:
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        if self.s != 0.0 and np.any(r == 0.0):
            raise EvaluationAtOrigin(f"{self.name} is singular at the origin")
        return r

    def value(self, x) -> np.ndarray:
        pts = _pts(x, self.n)
        P = self.poly.evaluate(pts)
        if self.s == 0.0:
            return P
        return self._r(pts) ** self.s * P

    def gradient(self, x) -> np.ndarray:
        pts = _pts(x, self.n)
        Dp = np.stack([g.evaluate(pts) for g in self._grad], axis=-1)
        if self.s == 0.0:
            return Dp
        r = self._r(pts)
        P = self.poly.evaluate(pts)
        return (r**self.s)[..., None] * Dp + (self.s * r ** (self.s - 2) * P)[
            ..., None
        ] * pts

    def hessian(self, x) -> np.ndarray:
        pts = _pts(x, self.n)
        n = self.n
        D2p = np.stack(
            [np.stack([self._hess[i][j].evaluate(pts) for j in range(n)], axis=-1) for i in range(n)],
            axis=-2,
        )
        if self.s == 0.0:
            return D2p
        r = self._r(pts)
        P = self.poly.evaluate(pts)
        Dp = np.stack([g.evaluate(pts) for g in self._grad], axis=-1)
        s = self.s
        rs = r**s
        rs2 = r ** (s - 2)
        rs4 = r ** (s - 4)
        eye = np.eye(n)
        cross = pts[..., :, None] * Dp[..., None, :] + Dp[..., :, None] * pts[..., None, :]
        outer = pts[..., :, None] * pts[..., None, :]
        return (
            rs[..., None, None] * D2p
            + (s * rs2)[..., None, None] * cross
            + (s * rs2 * P)[..., None, None] * eye
            + (s * (s - 2) * rs4 * P)[..., None, None] * outer
        )


class TrigPolynomialField(SolutionField):
    """u(x) = sum_k a_k cos(k.x) + b_k sin(k.x) over integer wavevectors k."""

    def __init__(self, wavevectors, cos_amps, sin_amps, name: str = "trig"):
        K = np.asarray(wavevectors, dtype=float)
        if K.ndim != 2:
            raise ValueError("wavevectors must be a (terms, n) array")
        self.n = K.shape[1]
        self.K = K
        self.a = np.asarray(cos_amps, dtype=float)
        self.b = np.asarray(sin_amps, dtype=float)
        if self.a.shape != (K.shape[0],) or self.b.shape != (K.shape[0],):
            raise ValueError("amplitude arrays must match wavevector count")
        self.name = name
        self.radial_exponent = None

    def _phases(self, pts: np.ndarray):
        dot = pts @ self.K.T
        return np.cos(dot), np.sin(dot)

    def value(self, x) -> np.ndarray:
        C, S = self._phases(_pts(x, self.n))
        return C @ self.a + S @ self.b

    def gradient(self, x) -> np.ndarray:
        C, S = self._phases(_pts(x, self.n))
        return (-S * self.a + C * self.b) @ self.K

    def hessian(self, x) -> np.ndarray:
        C, S = self._phases(_pts(x, self.n))
        amp = -(C * self.a + S * self.b)
        return np.einsum("...k,ki,kj->...ij", amp, self.K, self.K)


class CustomField(SolutionField):
    """Field defined by user callables; Hessian optional."""

    def __init__(
        self,
        n: int,
        value: Callable,
        gradient: Callable | None = None,
        hessian: Callable | None = None,
        name: str = "custom",
        radial_exponent: float | None = None,
    ):
        self.n = n
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self.name = name
        self.radial_exponent = radial_exponent

    def value(self, x) -> np.ndarray:
        return np.asarray(self._value(_pts(x, self.n)))

    def gradient(self, x) -> np.ndarray:
        if self._gradient is None:
            raise UnsupportedField(f"{self.name} has no gradient callable")
        return np.asarray(self._gradient(_pts(x, self.n)))

    def hessian(self, x) -> np.ndarray:
        if self._hessian is None:
            raise MissingHessian(f"{self.name} has no hessian callable")
        return np.asarray(self._hessian(_pts(x, self.n)))


class GridField(SolutionField):
    """Nodal values on a log-radial x periodic-angular grid (n = 2).

    Derivatives are finite differences of the nodal data in (t, theta) with
    t = log r, second-order centered inside and one-sided at the radial edges;
    queries between nodes are bilinear in (t, theta).
    """

    def __init__(self, radii, thetas, values, name: str = "grid"):
        r = np.asarray(radii, dtype=float)
        th = np.asarray(thetas, dtype=float)
        V = np.asarray(values, dtype=float)
        if r.ndim != 1 or th.ndim != 1 or V.shape != (r.size, th.size):
            raise ValueError("values must be shaped (len(radii), len(thetas))")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be positive and strictly increasing")
        t = np.log(r)
        dt = np.diff(t)
        if r.size >= 3 and (dt.max() - dt.min()) > 1e-8 * dt.mean():
            raise ValueError("radii must be uniform in log r")
        dth = np.diff(th)
        if th.size >= 2 and (dth.max() - dth.min()) > 1e-8 * abs(dth.mean()):
            raise ValueError("angles must be uniformly spaced")
        self.n = 2
        self.r = r
        self.theta = th
        self.t = t
        self.V = V
        self.name = name
        self.domain = (float(r[0]), float(r[-1]))
        self.radial_exponent = None
        self._tables: dict[str, np.ndarray] | None = None

    # ---------------------------------------------------------- FD tables

    def _build_tables(self) -> dict[str, np.ndarray]:
        if self._tables is not None:
            return self._tables
        Nr, Nt = self.V.shape
        if Nr < 4 or Nt < 4:
            raise MissingHessian("grid too coarse for second differences")
        ht = self.t[1] - self.t[0]
        hth = self.theta[1] - self.theta[0]
        V = self.V
        Vt = np.empty_like(V)
        Vtt = np.empty_like(V)
        Vt[1:-1] = (V[2:] - V[:-2]) / (2 * ht)
        Vt[0] = (-3 * V[0] + 4 * V[1] - V[2]) / (2 * ht)
        Vt[-1] = (3 * V[-1] - 4 * V[-2] + V[-3]) / (2 * ht)
        Vtt[1:-1] = (V[2:] - 2 * V[1:-1] + V[:-2]) / ht**2
        Vtt[0] = (2 * V[0] - 5 * V[1] + 4 * V[2] - V[3]) / ht**2
        Vtt[-1] = (2 * V[-1] - 5 * V[-2] + 4 * V[-3] - V[-4]) / ht**2
        Vth = (np.roll(V, -1, 1) - np.roll(V, 1, 1)) / (2 * hth)
        Vthth = (np.roll(V, -1, 1) - 2 * V + np.roll(V, 1, 1)) / hth**2
        Vtth = np.empty_like(V)
        Vtth[1:-1] = (Vth[2:] - Vth[:-2]) / (2 * ht)
        Vtth[0] = (-3 * Vth[0] + 4 * Vth[1] - Vth[2]) / (2 * ht)
        Vtth[-1] = (3 * Vth[-1] - 4 * Vth[-2] + Vth[-3]) / (2 * ht)
        self._tables = {
            "u": V, "ut": Vt, "uth": Vth, "utt": Vtt, "utth": Vtth, "uthth": Vthth,
        }
        return self._tables

    def _interp(self, table: np.ndarray, pts: np.ndarray) -> np.ndarray:
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        if np.any(r < self.r[0] * (1 - 1e-12)) or np.any(r > self.r[-1] * (1 + 1e-12)):
            raise ValueError("query radius outside grid annulus")
        t = np.log(np.clip(r, self.r[0], self.r[-1]))
        th = np.mod(np.arctan2(pts[..., 1], pts[..., 0]), 2 * np.pi)
        ht = self.t[1] - self.t[0]
        hth = self.theta[1] - self.theta[0]
        it = np.clip(((t - self.t[0]) / ht).astype(int), 0, self.r.size - 2)
        ft = (t - self.t[0]) / ht - it
        jt = ((th - self.theta[0]) / hth).astype(int) % self.theta.size
        fj = (th - self.theta[0]) / hth - ((th - self.theta[0]) / hth).astype(int)
        jn = (jt + 1) % self.theta.size
        return (
            table[it, jt] * (1 - ft) * (1 - fj)
            + table[it + 1, jt] * ft * (1 - fj)
            + table[it, jn] * (1 - ft) * fj
            + table[it + 1, jn] * ft * fj
        )

    # ------------------------------------------------------- field protocol

    def value(self, x) -> np.ndarray:
        return self._interp(self.V, _pts(x, 2))

    def _polar_first(self, pts):
        T = self._build_tables()
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        ur = self._interp(T["ut"], pts) / r
        uth = self._interp(T["uth"], pts)
        return r, ur, uth

    def gradient(self, x) -> np.ndarray:
        pts = _pts(x, 2)
        r, ur, uth = self._polar_first(pts)
        th = np.arctan2(pts[..., 1], pts[..., 0])
        c, s = np.cos(th), np.sin(th)
        gx = c * ur - s * uth / r
        gy = s * ur + c * uth / r
        return np.stack([gx, gy], axis=-1)

    def hessian(self, x) -> np.ndarray:
        pts = _pts(x, 2)
        T = self._build_tables()
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        th = np.arctan2(pts[..., 1], pts[..., 0])
        c, s = np.cos(th), np.sin(th)
        ut = self._interp(T["ut"], pts)
        uth = self._interp(T["uth"], pts)
        utt = self._interp(T["utt"], pts)
        utth = self._interp(T["utth"], pts)
        uthth = self._interp(T["uthth"], pts)
        r2 = r * r
        uxx = (c * c * (utt - ut) - 2 * c * s * utth + s * s * ut + 2 * c * s * uth + s * s * uthth) / r2
        uyy = (s * s * (utt - ut) + 2 * c * s * utth + c * c * ut - 2 * c * s * uth + c * c * uthth) / r2
        uxy = (c * s * (utt - ut) + (c * c - s * s) * utth - c * s * ut - (c * c - s * s) * uth - c * s * uthth) / r2
        H = np.empty(pts.shape[:-1] + (2, 2))
        H[..., 0, 0] = uxx
        H[..., 0, 1] = uxy
        H[..., 1, 0] = uxy
        H[..., 1, 1] = uyy
        return H


# ------------------------------------------------------------------ factories

def harmonic_polynomial(n: int, l: int, index: int = 0) -> PowerSolidField:
    """Solid harmonic of degree l, max modulus 1 on the unit sphere."""
    poly = solid_harmonic(n, l, index)
    return PowerSolidField(n, float(l), poly, name=f"harmonic(l={l},i={index})")


def indicial_coupling(n: int, sigma: float, l: int) -> float:
    """Coupling c with Delta(r^(sigma-l) Y_l) = c |x|^-2 r^(sigma-l) Y_l."""
    return sigma * (sigma + n - 2) - l * (l + n - 2)


def make_indicial(n: int, sigma: float, l: int, index: int = 0) -> tuple[PowerSolidField, float]:
    """Exact solution u = r^(sigma-l) Y_l of Delta u = c |x|^-2 u, with its c.

    sigma > 0 keeps u locally H^1 with the singular potential integrable
    against it; other sigma are refused.
    """
    if sigma <= 0:
        raise InvalidOrder(f"vanishing order must be positive, got {sigma}")
    poly = solid_harmonic(n, l, index)
    u = PowerSolidField(n, float(sigma), poly, name=f"indicial(σ={sigma:g},l={l})")
    return u, indicial_coupling(n, sigma, l)


def power_radial(n: int, sigma: float) -> PowerSolidField:
    """Pure radial power |x|^sigma."""
    return PowerSolidField(n, float(sigma), constant_poly(n), name=f"r^{sigma:g}")


def random_trig_polynomial(
    n: int,
    rng: np.random.Generator,
    terms: int = 4,
    max_wavenumber: int = 3,
    name: str = "trig",
) -> TrigPolynomialField:
    """Smooth oscillatory field with integer wavevectors and O(1) amplitudes."""
    K = rng.integers(-max_wavenumber, max_wavenumber + 1, size=(terms, n))
    while not np.all(np.any(K != 0, axis=1)):
        K = rng.integers(-max_wavenumber, max_wavenumber + 1, size=(terms, n))
    a = rng.uniform(-1.0, 1.0, size=terms)
    b = rng.uniform(-1.0, 1.0, size=terms)
    return TrigPolynomialField(K, a, b, name=name)


# ------------------------------------------------------------------ operators

@dataclass(frozen=True)
class EllipticOperator:
    """P(x, D) = sum_jk a_jk(x) d_j d_k with bounds on admissible lower order.

    ``coeff`` maps points (..., n) to matrices (..., n, n).  C1 and C2 bound
    the singular potential and drift sizes (|V| <= C1 |x|^-2, |W| <= C2 |x|^-1)
    used by inequality residuals; the operator itself is pure second order.
    """

    n: int
    coeff: Callable[[np.ndarray], np.ndarray]
    C1: float = 0.0
    C2: float = 0.0
    ellipticity: float = 1.0
    name: str = "P"

    def __post_init__(self):
        a0 = np.asarray(self.coeff(np.zeros((1, self.n))))[0]
        if a0.shape != (self.n, self.n):
            raise ValueError("coefficient callable returned wrong shape")
        if np.iscomplexobj(a0) and np.max(np.abs(a0.imag)) > 1e-14:
            raise ValueError("a_jk(0) must be real")
        if np.max(np.abs(a0 - a0.T)) > 1e-14:
            raise ValueError("a_jk(0) must be symmetric to 1e-14")

    def coefficients(self, x) -> np.ndarray:
        pts = _pts(x, self.n)
        A = np.asarray(self.coeff(pts))
        if A.shape != pts.shape[:-1] + (self.n, self.n):
            raise ValueError("coefficient callable returned wrong shape")
        return A

    @staticmethod
    def laplacian(n: int) -> "EllipticOperator":
        eye = np.eye(n)

        def a(pts):
            return np.broadcast_to(eye, pts.shape[:-1] + (n, n))

        return EllipticOperator(n, a, name="laplacian")

    @staticmethod
    def perturbed(n: int, eps: float, C1: float = 0.0, C2: float = 0.0) -> "EllipticOperator":
        """a_jk = delta_jk + eps x_j x_k / (1 + |x|^2); eigenvalues in [1, 1+eps]."""
        if not 0.0 <= eps <= 0.1:
            raise ValueError("perturbation size must lie in [0, 0.1]")

        def a(pts):
            r2 = np.sum(pts * pts, axis=-1)
            outer = pts[..., :, None] * pts[..., None, :]
            return np.eye(n) + eps * outer / (1.0 + r2)[..., None, None]

        return EllipticOperator(n, a, C1=C1, C2=C2, ellipticity=1.0, name=f"perturbed(ε={eps:g})")


def apply_operator(op: EllipticOperator, u: SolutionField, x) -> np.ndarray:
    """Pointwise P u = sum_jk a_jk(x) d_j d_k u(x)."""
    if op.n != u.n:
        raise ValueError("operator and field dimensions differ")
    pts = _pts(x, u.n)
    H = u.hessian(pts)
    A = op.coefficients(pts)
    return np.einsum("...ij,...ij->...", A, H)


def inequality_residual(op: EllipticOperator, u: SolutionField, x) -> np.ndarray:
    """|P u| - C1 |x|^-2 |u| - C2 |x|^-1 |grad u| at the given points.

    Nonnegative residual means the differential inequality
    |P u| <= C1 |x|^-2 |u| + C2 |x|^-1 |grad u| is saturated or violated there.
    """
    pts = _pts(x, u.n)
    r = np.sqrt(np.sum(pts * pts, axis=-1))
    if np.any(r == 0.0):
        raise EvaluationAtOrigin("inequality residual needs |x| > 0")
    Pu = np.abs(apply_operator(op, u, pts))
    g = np.sqrt(np.sum(u.gradient(pts) ** 2, axis=-1))
    return Pu - op.C1 * np.abs(u.value(pts)) / r**2 - op.C2 * g / r


# ------------------------------------------------------------------ CSV I/O

def grid_to_csv(field: GridField, path) -> None:
    """Rows r,theta,value with radii ascending, full precision."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "theta", "value"])
        for i, r in enumerate(field.r):
            for j, th in enumerate(field.theta):
                w.writerow([f"{r:.17g}", f"{th:.17g}", f"{field.V[i, j]:.17g}"])


def grid_from_csv(path, name: str | None = None) -> GridField:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if [h.strip() for h in header[:3]] != ["r", "theta", "value"]:
            raise ValueError("expected header r,theta,value")
        rows = [(float(a), float(b), float(c)) for a, b, c in rd]
    radii = sorted({row[0] for row in rows})
    thetas = sorted({row[1] for row in rows})
    if np.any(np.diff([r for r, _, _ in rows]) < 0):
        raise ValueError("radii must appear in ascending order")
    V = np.full((len(radii), len(thetas)), np.nan)
    ri = {r: i for i, r in enumerate(radii)}
    tj = {t: j for j, t in enumerate(thetas)}
    for r, th, v in rows:
        V[ri[r], tj[th]] = v
    if np.any(np.isnan(V)):
        raise ValueError("grid rows do not form a complete product grid")
    return GridField(np.array(radii), np.array(thetas), V, name=name or str(path))
