"""Homogeneous polynomials with exact coefficients and real solid harmonics.

Coefficients for Legendre-derived harmonics are built with `fractions.Fraction`
and converted to float once, so the only rounding in a harmonic's definition
is the final normalization to max modulus 1 on the unit sphere.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np


class HomogeneousPolynomial:
    """Polynomial all of whose monomials share one total degree.

    Terms are stored as ``{exponent tuple: coefficient}``.  Evaluation is
    vectorized over an arbitrary leading shape.
    """

    __slots__ = ("n", "degree", "terms")

    def __init__(self, n: int, degree: int, terms: dict[tuple[int, ...], float]):
        clean: dict[tuple[int, ...], float] = {}
        for exps, c in terms.items():
            c = float(c)
            if c == 0.0:
                continue
            if len(exps) != n or sum(exps) != degree or min(exps) < 0:
                raise ValueError(f"term {exps} not homogeneous of degree {degree} in {n} vars")
            clean[tuple(int(e) for e in exps)] = c
        self.n = n
        self.degree = degree
        self.terms = clean

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1])
        for exps, c in self.terms.items():
            term = np.full(pts.shape[:-1], c)
            for i, e in enumerate(exps):
                if e:
                    term = term * pts[..., i] ** e
            out += term
        return out

    def differentiate(self, i: int) -> "HomogeneousPolynomial":
        terms: dict[tuple[int, ...], float] = {}
        for exps, c in self.terms.items():
            if exps[i] == 0:
                continue
            new = list(exps)
            new[i] -= 1
            key = tuple(new)
            terms[key] = terms.get(key, 0.0) + c * exps[i]
        return HomogeneousPolynomial(self.n, max(self.degree - 1, 0), terms)

    def scale(self, alpha: float) -> "HomogeneousPolynomial":
        return HomogeneousPolynomial(
            self.n, self.degree, {e: alpha * c for e, c in self.terms.items()}
        )

    def __repr__(self) -> str:  # pragma: no cover
        return f"HomogeneousPolynomial(n={self.n}, degree={self.degree}, {len(self.terms)} terms)"


def constant_poly(n: int) -> HomogeneousPolynomial:
    return HomogeneousPolynomial(n, 0, {(0,) * n: 1.0})


# ------------------------------------------------------------------
# exact-arithmetic helpers (Fraction coefficient dictionaries)

_FracTerms = dict[tuple[int, ...], Fraction]


def _mul(a: _FracTerms, b: _FracTerms) -> _FracTerms:
    out: _FracTerms = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, Fraction(0)) + ca * cb
    return out


def _legendre_coeffs(l: int) -> list[Fraction]:
    """Coefficients of the degree-l Legendre polynomial, ascending powers."""
    coeffs = [Fraction(0)] * (l + 1)
    for k in range(l // 2 + 1):
        c = Fraction((-1) ** k * math.comb(l, k) * math.comb(2 * l - 2 * k, l), 2**l)
        coeffs[l - 2 * k] = c
    return coeffs


def _poly_derivative(coeffs: list[Fraction], times: int) -> list[Fraction]:
    out = list(coeffs)
    for _ in range(times):
        out = [out[j] * j for j in range(1, len(out))]
        if not out:
            out = [Fraction(0)]
    return out


def _sector_factor(mu: int, kind: str) -> _FracTerms:
    """Re or Im of (x + iy)^mu as exact terms in (x, y, z)."""
    out: _FracTerms = {}
    for k in range(mu + 1):
        c = Fraction(math.comb(mu, k))
        if kind == "cos" and k % 2 == 0:
            out[(mu - k, k, 0)] = c * (-1) ** (k // 2)
        elif kind == "sin" and k % 2 == 1:
            out[(mu - k, k, 0)] = c * (-1) ** ((k - 1) // 2)
    return out


def _max_abs_on_interval(coeffs: list[float]) -> float:
    """Max of |p(t)| over [-1, 1] via critical points of p^2."""
    p = np.polynomial.Polynomial(coeffs)
    g = p * p
    candidates = [-1.0, 1.0]
    roots = g.deriv().roots() if g.degree() >= 1 else []
    for r in np.atleast_1d(roots):
        if abs(r.imag) < 1e-12 and -1.0 <= r.real <= 1.0:
            candidates.append(float(r.real))
    return max(abs(p(t)) for t in candidates)


@lru_cache(maxsize=None)
def circular_harmonic(l: int, kind: str) -> HomogeneousPolynomial:
    """Degree-l harmonic polynomial in the plane, max modulus exactly 1.

    ``kind`` selects Re (``"cos"``) or Im (``"sin"``) of (x + iy)^l; on the
    unit circle these are cos(l theta) and sin(l theta).
    """
    if l < 0:
        raise ValueError("degree must be nonnegative")
    if kind not in ("cos", "sin"):
        raise ValueError("kind must be 'cos' or 'sin'")
    if l == 0:
        if kind == "sin":
            raise ValueError("sin harmonic of degree 0 is identically zero")
        return constant_poly(2)
    terms: dict[tuple[int, ...], float] = {}
    for k in range(l + 1):
        c = math.comb(l, k)
        if kind == "cos" and k % 2 == 0:
            terms[(l - k, k)] = c * (-1) ** (k // 2)
        elif kind == "sin" and k % 2 == 1:
            terms[(l - k, k)] = c * (-1) ** ((k - 1) // 2)
    return HomogeneousPolynomial(2, l, terms)


@lru_cache(maxsize=None)
def tesseral_harmonic(l: int, m: int) -> HomogeneousPolynomial:
    """Degree-l real solid harmonic in 3 variables, max modulus 1 on S^2.

    m in [-l, l]; m >= 0 gives the cos(m theta) sector, m < 0 the
    sin(|m| theta) sector.  Restricted to the sphere this is an associated
    Legendre function in cos(phi) times the sector factor, rescaled so the
    sphere maximum is 1 (exactly 1 at the poles when m = 0).
    """
    if l < 0 or abs(m) > l:
        raise ValueError("need l >= 0 and |m| <= l")
    mu = abs(m)
    kind = "sin" if m < 0 else "cos"
    if mu == 0 and kind == "sin":
        raise ValueError("sin sector needs m < 0")

    q = _poly_derivative(_legendre_coeffs(l), mu)  # d^mu/dt^mu P_l, ascending

    # r^(l - mu) * q(z / r) as a polynomial: q_j z^j (x^2+y^2+z^2)^((l-mu-j)/2)
    radial: _FracTerms = {}
    for j, cj in enumerate(q):
        if cj == 0:
            continue
        pw = l - mu - j
        if pw % 2:
            raise AssertionError("parity violation in Legendre derivative")
        half = pw // 2
        for i1 in range(half + 1):
            for i2 in range(half - i1 + 1):
                i3 = half - i1 - i2
                mult = Fraction(math.factorial(half), math.factorial(i1) * math.factorial(i2) * math.factorial(i3))
                key = (2 * i1, 2 * i2, j + 2 * i3)
                radial[key] = radial.get(key, Fraction(0)) + cj * mult

    if mu:
        full = _mul(_sector_factor(mu, kind), radial)
    else:
        full = radial

    # sphere maximum: sector max is 1, so maximize |q(t)| (1-t^2)^(mu/2) over t
    qf = [float(c) for c in q]
    if mu == 0:
        peak = _max_abs_on_interval(qf)
    else:
        # square to keep it polynomial: q(t)^2 (1-t^2)^mu
        g = np.polynomial.Polynomial(qf) ** 2 * np.polynomial.Polynomial([1.0, 0.0, -1.0]) ** mu
        candidates = [0.0]
        for r in np.atleast_1d(g.deriv().roots()):
            if abs(r.imag) < 1e-12 and -1.0 < r.real < 1.0:
                candidates.append(float(r.real))
        peak = math.sqrt(max(float(g(t)) for t in candidates))
    if peak <= 0:
        raise AssertionError("harmonic normalization degenerate")

    return HomogeneousPolynomial(3, l, {e: float(c) / peak for e, c in full.items()})


def solid_harmonic(n: int, l: int, index: int = 0) -> HomogeneousPolynomial:
    """Uniform entry point: index enumerates the sector.

    n = 2: index 0 -> cos, 1 -> sin.
    n = 3: index 0 -> m = 0, odd index 2k-1 -> m = k (cos), even 2k -> m = -k (sin).
    """
    if n == 2:
        return circular_harmonic(l, "sin" if index else "cos")
    if n == 3:
        if index == 0:
            return tesseral_harmonic(l, 0)
        k = (index + 1) // 2
        return tesseral_harmonic(l, k if index % 2 else -k)
    raise ValueError("only dimensions 2 and 3 are supported")
