"""Dirichlet problem for the discrete axisymmetric Laplace equation.

Unknowns are all nodes off the three Dirichlet sides (r = rmax, z = zmin,
z = zmax), including the axis column, where the even-symmetry closure holds.
Multiplying each row by its control-volume weight (``r_i`` off the axis,
``hr/8`` on it) turns the five-point operator into a symmetric matrix, which
is then solved with conjugate gradients.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from axiverify.cases import FlowCase
from axiverify.diffops import axisymmetric_laplacian
from axiverify.grid import AxiGrid, NodeMask, ScalarField, build_grid, field_norms, sample_case

logger = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Raised when a convergence study cannot proceed because a solve failed."""


@dataclass(frozen=True)
class SolveParams:
    tol: float = 1e-10
    max_iter: int | None = None
    initial_guess: str = "zeros"

    def __post_init__(self):
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter!r}")
        if self.initial_guess not in ("zeros", "boundary-average"):
            raise ValueError(f"unknown initial guess policy {self.initial_guess!r}")

    def iteration_cap(self, grid: AxiGrid) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return 100 * max(grid.nr, grid.nz) ** 2


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    field: ScalarField
    iterations: int
    residual: float
    converged: bool
    scale: float


def unknown_nodes(grid: AxiGrid) -> np.ndarray:
    return ~grid.dirichlet_nodes()


def residual_scale(boundary: np.ndarray) -> float:
    return max(float(np.max(np.abs(boundary))), 1.0)


def relative_residual(f: ScalarField, scale: float) -> float:
    """``max |L f| * L^2 / scale`` over the unknown nodes.

    ``L`` is the larger domain extent, which makes the measure dimensionless
    and bounds the solution error by roughly ``tol * scale / 4``.
    """
    grid = f.grid
    extent = max(grid.rmax, grid.zmax - grid.zmin)
    lap = axisymmetric_laplacian(f).values[unknown_nodes(grid)]
    return float(np.max(np.abs(lap))) * extent**2 / scale


def _weighted_system(grid: AxiGrid, boundary: np.ndarray):
    """SPD matrix ``A = -W L`` on the unknowns and the matching right-hand side."""
    nr, nz = grid.shape
    hr, hz = grid.hr, grid.hz
    r = grid.r
    ni, nj = nr - 1, nz - 2
    index = -np.ones(grid.shape, dtype=int)
    index[:ni, 1 : nz - 1] = np.arange(ni * nj).reshape(ni, nj)

    weight = r.copy()
    weight[0] = hr / 8.0
    # radial face coefficients r_{i+1/2} / hr^2 between column i and i+1
    face = (r[:-1] + 0.5 * hr) / hr**2

    rows, cols, vals = [], [], []
    rhs = np.zeros(ni * nj)
    diag = np.zeros(ni * nj)

    def couple(k, i2, j2, c):
        diag[k] += c
        m = index[i2, j2]
        if m >= 0:
            rows.append(k)
            cols.append(m)
            vals.append(-c)
        else:
            rhs[k] += c * boundary[i2, j2]

    for i in range(ni):
        for j in range(1, nz - 1):
            k = index[i, j]
            couple(k, i + 1, j, face[i])
            if i > 0:
                couple(k, i - 1, j, face[i - 1])
            cz = weight[i] / hz**2
            couple(k, i, j + 1, cz)
            couple(k, i, j - 1, cz)

    n = ni * nj
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr() + sp.diags(diag)
    w = np.repeat(weight[:ni], nj)
    return A.tocsr(), rhs, w, index


def solve_laplace_dirichlet(
    grid: AxiGrid, boundary: ScalarField, params: SolveParams | None = None
) -> SolveOutcome:
    """Solve ``L psi = 0`` with ``boundary`` values on the Dirichlet sides.

    Only the edge-node values of ``boundary`` are read.  Non-convergence is
    reported through ``converged=False`` rather than raised.
    """
    params = params or SolveParams()
    if boundary.grid != grid:
        raise ValueError("boundary field lives on a different grid")
    edge = grid.dirichlet_nodes()
    data = np.where(edge, boundary.values, 0.0)
    if not np.all(np.isfinite(data[edge])):
        raise ValueError("boundary data must be finite on every Dirichlet node")

    scale = residual_scale(data[edge])
    extent = max(grid.rmax, grid.zmax - grid.zmin)
    target = params.tol * scale / extent**2

    A, b, w, index = _weighted_system(grid, data)
    inner = index >= 0
    x = np.zeros(b.size)
    if params.initial_guess == "boundary-average":
        x[:] = float(np.mean(data[edge]))

    def assemble(xv):
        out = data.copy()
        out[inner] = xv[index[inner]]
        return ScalarField(grid, out)

    cap = params.iteration_cap(grid)
    iterations = 0
    res = relative_residual(assemble(x), scale)
    while res > params.tol and iterations < cap:
        # restart from the true residual so recurrence drift cannot fake convergence
        r = b - A @ x
        p = r.copy()
        rs = r @ r
        while iterations < cap:
            if np.max(np.abs(r / w)) <= 0.5 * target:
                break
            Ap = A @ p
            alpha = rs / (p @ Ap)
            x += alpha * p
            r -= alpha * Ap
            rs_new = r @ r
            p = r + (rs_new / rs) * p
            rs = rs_new
            iterations += 1
        res = relative_residual(assemble(x), scale)
        logger.debug("cg pass ended at iteration %d, relative residual %.3e", iterations, res)

    field = assemble(x)
    return SolveOutcome(field, iterations, res, res <= params.tol, scale)


def boundary_from_case(case: FlowCase, grid: AxiGrid, t: float = 0.0) -> ScalarField:
    s = sample_case(case, grid, t)
    edge = grid.dirichlet_nodes()
    if not s.mask.valid[edge].all():
        raise ValueError(f"case {case.name!r} has an exclusion zone touching the Dirichlet boundary")
    return ScalarField(grid, np.where(edge, s.psi.values, 0.0))


@dataclass(frozen=True)
class ConvergenceRow:
    nr: int
    nz: int
    h: float
    sup_error: float
    observed_order: float | None
    below_floor: bool
    iterations: int


def convergence_study(
    case: FlowCase,
    domain: tuple[float, float, float],
    grids: list[tuple[int, int]],
    t: float = 0.0,
    params: SolveParams | None = None,
) -> list[ConvergenceRow]:
    """Sup-norm error of the discrete solve against the analytic psi, per level.

    ``domain`` is ``(rmax, zmin, zmax)``.  Errors within ``100 * tol * scale``
    are solver-tolerance floor; no order is reported for them.
    """
    params = params or SolveParams()
    if len(grids) < 2:
        raise ValueError("a convergence study needs at least two grid levels")
    levels = [build_grid(nr, nz, *domain) for nr, nz in grids]
    for coarse, fine in zip(levels, levels[1:]):
        if not fine.refines(coarse):
            raise ValueError(f"grid {fine.shape} does not refine {coarse.shape} by a factor of 2")

    rows: list[ConvergenceRow] = []
    prev_err = None
    for g in levels:
        s = sample_case(case, g, t)
        if s.mask.count != g.nr * g.nz:
            raise ValueError(f"case {case.name!r} has an exclusion zone inside the domain")
        out = solve_laplace_dirichlet(g, boundary_from_case(case, g, t), params)
        if not out.converged:
            raise SolverError(
                f"solve on {g.nr}x{g.nz} did not converge: residual {out.residual:.3e} "
                f"after {out.iterations} iterations"
            )
        err, _ = field_norms(out.field - s.psi, NodeMask.all_valid(g))
        floor = err <= 100.0 * params.tol * out.scale
        order = None
        if prev_err is not None and not floor and prev_err > 0:
            order = math.log2(prev_err / err)
        rows.append(ConvergenceRow(g.nr, g.nz, g.h, err, order, floor, out.iterations))
        prev_err = None if floor else err
    return rows
