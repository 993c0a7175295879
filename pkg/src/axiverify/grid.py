"""Structured (r, z) node grids that include the symmetry axis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from axiverify.cases import FlowCase, check_outside_singularities


@dataclass(frozen=True)
class AxiGrid:
    """Collocated node grid on ``[0, rmax] x [zmin, zmax]``.

    Node ``(i, j)`` sits at ``r_i = i*hr`` and ``z_j = zmin + j*hz``, so column
    ``i = 0`` lies on the axis.  Field arrays are indexed ``[i, j]``.
    """

    nr: int
    nz: int
    rmax: float
    zmin: float
    zmax: float

    @property
    def hr(self) -> float:
        return self.rmax / (self.nr - 1)

    @property
    def hz(self) -> float:
        return (self.zmax - self.zmin) / (self.nz - 1)

    @property
    def h(self) -> float:
        return max(self.hr, self.hz)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nr, self.nz)

    @property
    def r(self) -> np.ndarray:
        r = np.arange(self.nr) * self.hr
        r[-1] = self.rmax
        return r

    @property
    def z(self) -> np.ndarray:
        z = self.zmin + np.arange(self.nz) * self.hz
        z[-1] = self.zmax
        return z

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.r, self.z, indexing="ij")

    def coordinate(self, name: str) -> ScalarField:
        """The field ``r`` or ``z`` itself, carrying its exact gradient."""
        R, Z = self.mesh()
        ones, zeros = np.ones(self.shape), np.zeros(self.shape)
        if name == "r":
            return ScalarField(self, R, (ones, zeros))
        if name == "z":
            return ScalarField(self, Z, (zeros, ones))
        raise ValueError(f"unknown coordinate {name!r}")

    def constant(self, value: float) -> ScalarField:
        zeros = np.zeros(self.shape)
        return ScalarField(self, np.full(self.shape, float(value)), (zeros, zeros))

    def dirichlet_nodes(self) -> np.ndarray:
        """Nodes on r = rmax, z = zmin and z = zmax; the axis is not a boundary."""
        edge = np.zeros(self.shape, dtype=bool)
        edge[-1, :] = True
        edge[:, 0] = True
        edge[:, -1] = True
        return edge

    def refines(self, coarse: AxiGrid) -> bool:
        return (
            (self.rmax, self.zmin, self.zmax) == (coarse.rmax, coarse.zmin, coarse.zmax)
            and self.nr - 1 == 2 * (coarse.nr - 1)
            and self.nz - 1 == 2 * (coarse.nz - 1)
        )

    def describe(self) -> dict:
        return {
            "nr": self.nr,
            "nz": self.nz,
            "rmax": self.rmax,
            "zmin": self.zmin,
            "zmax": self.zmax,
            "hr": self.hr,
            "hz": self.hz,
        }


def build_grid(nr: int, nz: int, rmax: float, zmin: float, zmax: float) -> AxiGrid:
    if int(nr) != nr or int(nz) != nz:
        raise ValueError(f"node counts must be integers, got nr={nr!r}, nz={nz!r}")
    if nr < 3 or nz < 3:
        raise ValueError(f"need at least 3 nodes per direction, got nr={nr}, nz={nz}")
    for name, v in (("rmax", rmax), ("zmin", zmin), ("zmax", zmax)):
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")
    if rmax <= 0:
        raise ValueError(f"rmax must be positive, got {rmax}")
    if not zmin < zmax:
        raise ValueError(f"need zmin < zmax, got zmin={zmin}, zmax={zmax}")
    return AxiGrid(int(nr), int(nz), float(rmax), float(zmin), float(zmax))


class ScalarField:
    """Node values on a grid, optionally with an exactly known gradient.

    The gradient ``(f_r, f_z)`` is carried by fields coming from analytic
    sources and propagated through linear combinations and products; discrete
    derivative routes never consult it.
    """

    __slots__ = ("grid", "values", "grad")

    def __init__(self, grid: AxiGrid, values, grad=None):
        values = np.array(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
        values.flags.writeable = False
        if grad is not None:
            grad = tuple(np.array(g, dtype=float) for g in grad)
            for g in grad:
                g.flags.writeable = False
        self.grid = grid
        self.values = values
        self.grad = grad

    def __repr__(self) -> str:
        return f"ScalarField(grid={self.grid.nr}x{self.grid.nz}, grad={'yes' if self.grad else 'no'})"

    def _check(self, other: ScalarField) -> None:
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            grad = None
            if self.grad is not None and other.grad is not None:
                grad = (self.grad[0] + other.grad[0], self.grad[1] + other.grad[1])
            return ScalarField(self.grid, self.values + other.values, grad)
        return ScalarField(self.grid, self.values + float(other), self.grad)

    __radd__ = __add__

    def __neg__(self):
        grad = None if self.grad is None else (-self.grad[0], -self.grad[1])
        return ScalarField(self.grid, -self.values, grad)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            grad = None
            if self.grad is not None and other.grad is not None:
                grad = tuple(
                    self.values * og + other.values * sg for sg, og in zip(self.grad, other.grad)
                )
            return ScalarField(self.grid, self.values * other.values, grad)
        c = float(other)
        grad = None if self.grad is None else (c * self.grad[0], c * self.grad[1])
        return ScalarField(self.grid, c * self.values, grad)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class NodeMask:
    grid: AxiGrid
    valid: np.ndarray

    def __post_init__(self):
        if self.valid.shape != self.grid.shape:
            raise ValueError("mask shape does not match grid")

    @classmethod
    def all_valid(cls, grid: AxiGrid) -> NodeMask:
        return cls(grid, np.ones(grid.shape, dtype=bool))

    @property
    def count(self) -> int:
        return int(self.valid.sum())

    def __and__(self, other) -> NodeMask:
        other = other.valid if isinstance(other, NodeMask) else np.asarray(other, dtype=bool)
        return NodeMask(self.grid, self.valid & other)

    def without_axis(self) -> NodeMask:
        return self.without_columns(0)

    def without_columns(self, *columns: int) -> NodeMask:
        valid = self.valid.copy()
        valid[list(columns), :] = False
        return NodeMask(self.grid, valid)


def singularity_mask(case: FlowCase, grid: AxiGrid) -> NodeMask:
    R, Z = grid.mesh()
    return NodeMask(grid, check_outside_singularities(case, R, Z, default_radius=3.0 * grid.h))


@dataclass(frozen=True, eq=False)
class CaseSample:
    """Analytic fields of a case on a grid at one instant.

    ``jet`` and ``force`` hold the complete analytic derivative record and are
    what the analytic derivative route of the physics layer reads.
    """

    case: FlowCase
    t: float
    psi: ScalarField
    psi_t: ScalarField
    T: ScalarField
    mask: NodeMask
    jet: object
    force: object


def sample_case(case: FlowCase, grid: AxiGrid, t: float = 0.0) -> CaseSample:
    """Evaluate a case at every node; nodes inside exclusion zones hold NaN."""
    R, Z = grid.mesh()
    mask = singularity_mask(case, grid)
    jet = case.psi_jet(R, Z, t)
    force = case.force_jet(R, Z, t)
    bad = np.zeros(grid.shape, dtype=bool)
    for arr in (jet.psi, jet.r, jet.z, jet.t, force.T, force.r, force.z):
        bad |= mask.valid & ~np.isfinite(arr)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(
            f"case {case.name!r} is non-finite at valid node ({i}, {j}) = "
            f"(r={R[i, j]:g}, z={Z[i, j]:g}); a singularity lies inside the domain"
        )

    def masked(a):
        return np.where(mask.valid, a, np.nan)

    return CaseSample(
        case=case,
        t=t,
        psi=ScalarField(grid, masked(jet.psi), (masked(jet.r), masked(jet.z))),
        psi_t=ScalarField(grid, masked(jet.t), (masked(jet.rt), masked(jet.zt))),
        T=ScalarField(grid, masked(force.T), (masked(force.r), masked(force.z))),
        mask=mask,
        jet=jet,
        force=force,
    )


def field_norms(f: ScalarField, mask: NodeMask | None = None) -> tuple[float, float]:
    """``(max |f|, sqrt(mean f^2))`` over valid nodes."""
    if mask is None:
        mask = NodeMask.all_valid(f.grid)
    if mask.grid != f.grid:
        raise ValueError("field and mask live on different grids")
    vals = f.values[mask.valid]
    if vals.size == 0:
        raise ValueError("no valid nodes to take a norm over")
    if not np.all(np.isfinite(vals)):
        raise ValueError("field has non-finite values on valid nodes")
    return float(np.max(np.abs(vals))), float(np.sqrt(np.mean(vals**2)))
