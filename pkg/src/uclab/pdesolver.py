"""Dirichlet solves on annuli: non-analytic test solutions for the checkers.

The equation is P(x,D) u = c1 |x|^-2 u + c2 |x|^-1 du/dr (the equality case
of the differential inequality the estimates assume) with Dirichlet data on
both circles.  Discretization is second-order central differences on a grid
uniform in (log r, theta); multiplying the equation by r^2 removes every
singular factor, so the stencil stays well conditioned down to tiny r_in.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from .errors import NonElliptic, SingularSystem
from .fields import EllipticOperator, GridField, SolutionField

__all__ = [
    "AnnulusProblem",
    "boundary_values",
    "assemble",
    "solve",
    "ConvergenceTable",
    "problem_from_reference",
    "manufactured_convergence",
    "problem_from_config",
    "write_grid_csv",
]


@dataclass(frozen=True)
class AnnulusProblem:
    """Second-order Dirichlet problem on the annulus r_in < |x| < r_out.

    g_in and g_out may be callables of theta, nodal arrays of length Ntheta,
    or trigonometric-polynomial dicts {"cos": [c0, c1, ...], "sin": [s1, ...]}.
    When the operator declares positive lower-order bounds, c1 and c2 must
    respect them; zero declared bounds leave the coefficients unconstrained.
    """

    op: EllipticOperator
    r_in: float
    r_out: float
    g_in: object
    g_out: object
    c1: float = 0.0
    c2: float = 0.0
    Nr: int = 64
    Ntheta: int = 64

    def __post_init__(self):
        if self.op.n != 2:
            raise ValueError("annulus solver is two-dimensional")
        if not (0.0 < self.r_in < self.r_out):
            raise ValueError("need 0 < r_in < r_out")
        if self.Nr < 16 or self.Ntheta < 16:
            raise ValueError("grid sizes must be at least 16")
        if self.op.C1 > 0.0 and abs(self.c1) > self.op.C1:
            raise ValueError("potential coefficient exceeds the declared bound C1")
        if self.op.C2 > 0.0 and abs(self.c2) > self.op.C2:
            raise ValueError("drift coefficient exceeds the declared bound C2")

    @property
    def radii(self) -> np.ndarray:
        return np.exp(np.linspace(math.log(self.r_in), math.log(self.r_out), self.Nr))

    @property
    def thetas(self) -> np.ndarray:
        return np.arange(self.Ntheta) * (2.0 * np.pi / self.Ntheta)


def boundary_values(g, thetas: np.ndarray) -> np.ndarray:
    if callable(g):
        return np.asarray(g(thetas), dtype=float)
    if isinstance(g, dict):
        out = np.zeros_like(thetas)
        for k, c in enumerate(g.get("cos", [])):
            out += c * np.cos(k * thetas)
        for k, s in enumerate(g.get("sin", []), start=1):
            out += s * np.sin(k * thetas)
        return out
    arr = np.asarray(g, dtype=float)
    if arr.shape != thetas.shape:
        raise ValueError("nodal boundary data must have length Ntheta")
    return arr


def _polar_coefficients(problem: AnnulusProblem):
    """Stencil coefficient tables for the equation multiplied by r^2.

    Writing P = alpha u_xx + beta u_xy + gamma u_yy in polar coordinates with
    t = log r gives A_tt u_tt + A_tth u_tth + A_thth u_thth + A_t u_t +
    A_th u_th with A_t = A_thth - A_tt and A_th = -A_tth.
    """
    r = problem.radii
    th = problem.thetas
    R, TH = np.meshgrid(r, th, indexing="ij")
    pts = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1)
    a = problem.op.coefficients(pts)
    alpha = a[..., 0, 0]
    beta = a[..., 0, 1] + a[..., 1, 0]
    gamma = a[..., 1, 1]
    lam_min = 0.5 * (alpha + gamma) - np.sqrt(
        (0.5 * (alpha - gamma)) ** 2 + (0.5 * beta) ** 2
    )
    if np.min(lam_min) <= 0.0:
        raise NonElliptic(
            f"coefficient matrix loses ellipticity on the grid "
            f"(min eigenvalue {np.min(lam_min):.3e})"
        )
    c, s = np.cos(TH), np.sin(TH)
    A_tt = alpha * c * c + beta * c * s + gamma * s * s
    A_tth = -2.0 * alpha * c * s + beta * (c * c - s * s) + 2.0 * gamma * c * s
    A_thth = alpha * s * s - beta * c * s + gamma * c * c
    return A_tt, A_tth, A_thth


def assemble(problem: AnnulusProblem):
    """Sparse system (A, b) for the nodal unknowns, row-major (i_r, j_theta).

    Boundary rows are identity rows carrying the Dirichlet data.
    """
    Nr, Nt = problem.Nr, problem.Ntheta
    t = np.log(problem.radii)
    ht = t[1] - t[0]
    hth = 2.0 * np.pi / Nt
    A_tt, A_tth, A_thth = _polar_coefficients(problem)
    A_t = A_thth - A_tt - problem.c2
    A_th = -A_tth

    def idx(i, j):
        return i * Nt + j

    rows, cols, vals = [], [], []
    ii, jj = np.meshgrid(np.arange(1, Nr - 1), np.arange(Nt), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    center = idx(ii, jj)
    # Interior rows are scaled by ht^2 so entries stay O(1) at any resolution;
    # the residual check below then reads directly against the data size.
    ctt = A_tt[ii, jj]
    cthth = A_thth[ii, jj] * (ht / hth) ** 2
    ct = A_t[ii, jj] * (ht / 2.0)
    cth = A_th[ii, jj] * ht**2 / (2.0 * hth)
    cx = A_tth[ii, jj] * ht / (4.0 * hth)
    stencil = [
        (0, 0, -2.0 * ctt - 2.0 * cthth - problem.c1 * ht**2),
        (1, 0, ctt + ct),
        (-1, 0, ctt - ct),
        (0, 1, cthth + cth),
        (0, -1, cthth - cth),
        (1, 1, cx),
        (-1, -1, cx),
        (1, -1, -cx),
        (-1, 1, -cx),
    ]
    for di, dj, v in stencil:
        rows.append(center)
        cols.append(idx(ii + di, (jj + dj) % Nt))
        vals.append(np.broadcast_to(v, center.shape))
    bidx = np.concatenate([idx(0, np.arange(Nt)), idx(Nr - 1, np.arange(Nt))])
    rows.append(bidx)
    cols.append(bidx)
    vals.append(np.ones(bidx.size))
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(Nr * Nt, Nr * Nt),
    )
    b = np.zeros(Nr * Nt)
    b[idx(0, np.arange(Nt))] = boundary_values(problem.g_in, problem.thetas)
    b[idx(Nr - 1, np.arange(Nt))] = boundary_values(problem.g_out, problem.thetas)
    return A, b


def solve(problem: AnnulusProblem) -> GridField:
    """Direct sparse solve; checks the discrete residual to 1e-10 relative."""
    A, b = assemble(problem)
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            x = spsolve(A, b)
        except MatrixRankWarning as exc:
            raise SingularSystem("discrete operator is singular") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystem("direct solve produced non-finite values")
    residual = float(np.max(np.abs(A @ x - b)))
    scale = max(1.0, float(np.max(np.abs(b))))
    if residual > 1e-10 * scale:
        raise SingularSystem(
            f"discrete residual {residual:.3e} exceeds 1e-10 of data size {scale:.3e}"
        )
    return GridField(
        problem.radii,
        problem.thetas,
        x.reshape(problem.Nr, problem.Ntheta),
        name=f"solve({problem.op.name},{problem.Nr}x{problem.Ntheta})",
    )


# -------------------------------------------------------------- convergence

@dataclass(frozen=True)
class ConvergenceTable:
    levels: tuple[int, ...]
    errors: tuple[float, ...]
    orders: tuple[float, ...]


def problem_from_reference(
    op: EllipticOperator,
    r_in: float,
    r_out: float,
    reference: SolutionField,
    c1: float = 0.0,
    c2: float = 0.0,
    Nr: int = 64,
    Ntheta: int = 64,
) -> AnnulusProblem:
    """Dirichlet data read off an analytic reference on both circles."""

    def ring(radius):
        def g(thetas):
            pts = radius * np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)
            return reference.value(pts)

        return g

    return AnnulusProblem(
        op=op, r_in=r_in, r_out=r_out,
        g_in=ring(r_in), g_out=ring(r_out),
        c1=c1, c2=c2, Nr=Nr, Ntheta=Ntheta,
    )


def manufactured_convergence(
    problem: AnnulusProblem,
    reference: SolutionField,
    levels: tuple[int, ...] = (64, 128, 256),
    refine_theta: bool = True,
) -> ConvergenceTable:
    """Max-norm nodal errors against the reference and empirical orders.

    Each level solves at Nr = level (and Ntheta = level unless refine_theta
    is false, the fixed-angle diagnostic); orders are log2(e_h / e_(h/2)).
    """
    errors = []
    for N in levels:
        p = AnnulusProblem(
            op=problem.op, r_in=problem.r_in, r_out=problem.r_out,
            g_in=problem.g_in, g_out=problem.g_out,
            c1=problem.c1, c2=problem.c2,
            Nr=N, Ntheta=N if refine_theta else problem.Ntheta,
        )
        field = solve(p)
        R, TH = np.meshgrid(p.radii, p.thetas, indexing="ij")
        pts = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1)
        exact = reference.value(pts)
        errors.append(float(np.max(np.abs(field.V - exact)) / np.max(np.abs(exact))))
    orders = tuple(
        math.log2(errors[k] / errors[k + 1]) for k in range(len(errors) - 1)
    )
    return ConvergenceTable(levels=tuple(levels), errors=tuple(errors), orders=orders)


def problem_from_config(cfg: dict) -> AnnulusProblem:
    """Problem from the JSON schema {operator, r_in, r_out, c1, c2, g_in, g_out, Nr, Ntheta}."""
    spec = dict(cfg)
    opspec = dict(spec.pop("operator", {"kind": "laplacian"}))
    kind = opspec.pop("kind", "laplacian")
    if kind == "laplacian":
        op = EllipticOperator.laplacian(2)
        if opspec:
            raise ValueError(f"unknown laplacian options: {sorted(opspec)}")
    elif kind == "perturbed":
        op = EllipticOperator.perturbed(
            2,
            float(opspec.pop("eps", 0.0)),
            C1=float(opspec.pop("C1", 0.0)),
            C2=float(opspec.pop("C2", 0.0)),
        )
        if opspec:
            raise ValueError(f"unknown perturbed options: {sorted(opspec)}")
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    problem = AnnulusProblem(
        op=op,
        r_in=float(spec.pop("r_in")),
        r_out=float(spec.pop("r_out")),
        g_in=spec.pop("g_in"),
        g_out=spec.pop("g_out"),
        c1=float(spec.pop("c1", 0.0)),
        c2=float(spec.pop("c2", 0.0)),
        Nr=int(spec.pop("Nr", 64)),
        Ntheta=int(spec.pop("Ntheta", 64)),
    )
    if spec:
        raise ValueError(f"unknown solve options: {sorted(spec)}")
    return problem


def write_grid_csv(field: GridField, path) -> None:
    """Nodal values, one row per (r, theta) pair in row-major order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "theta", "value"])
        for i, r in enumerate(field.r):
            for j, th in enumerate(field.theta):
                w.writerow([f"{r:.17g}", f"{th:.17g}", f"{field.V[i, j]:.17g}"])
