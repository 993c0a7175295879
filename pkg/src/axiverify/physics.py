"""Velocity, Bernoulli pressure and momentum residuals of potential flow.

A :class:`StateSnapshot` fixes one instant of a flow and records where its
derivatives come from.  On the ``analytic`` route every derivative is read from
the case's analytic jet.  On the ``discrete`` route all spatial derivatives are
built by composing :mod:`axiverify.diffops` on the stored fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from axiverify.cases import FlowCase, ForceJet, axisymmetric_laplacian_from_jet
from axiverify.diffops import axisymmetric_laplacian, curl_theta, diff, divergence_axi
from axiverify.grid import AxiGrid, CaseSample, NodeMask, ScalarField, sample_case

SOURCES = ("analytic", "discrete")

# Composing a difference over one-sided edge differences leaves an error of
# O(h) (first-derivative composites) or O(1) (second-derivative composites) on
# the edge layers, so discrete residuals built that way are only reported this
# many nodes inside the Dirichlet sides.  The axis column needs no band.
COMPOSITE_BAND = 3


@dataclass(frozen=True, eq=False)
class StateSnapshot:
    psi: ScalarField
    psi_t: ScalarField
    T: ScalarField
    nu: float
    rho: float
    mask: NodeMask
    source: str = "discrete"
    t: float = 0.0
    sample: CaseSample | None = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"derivative source must be one of {SOURCES}, got {self.source!r}")
        if self.source == "analytic" and self.sample is None:
            raise ValueError("analytic derivatives need the case sample")
        if not (self.nu > 0 and self.rho > 0):
            raise ValueError(f"need nu > 0 and rho > 0, got nu={self.nu}, rho={self.rho}")
        grid = self.psi.grid
        if any(f.grid != grid for f in (self.psi_t, self.T)) or self.mask.grid != grid:
            raise ValueError("snapshot fields must share one grid")

    @property
    def grid(self) -> AxiGrid:
        return self.psi.grid

    def with_force(self, T: ScalarField) -> StateSnapshot:
        """Same flow under a different force potential (analytic route keeps T's gradient)."""
        sample = self.sample
        if sample is not None:
            if T.grad is None:
                raise ValueError("analytic snapshot needs a force potential with a known gradient")
            sample = CaseSample(
                sample.case, sample.t, sample.psi, sample.psi_t, T, sample.mask,
                sample.jet, ForceJet(T.values, T.grad[0], T.grad[1]),
            )
        return StateSnapshot(
            self.psi, self.psi_t, T, self.nu, self.rho, self.mask, self.source, self.t, sample
        )


def snapshot_from_case(
    case: FlowCase, grid: AxiGrid, t: float = 0.0, source: str = "analytic"
) -> StateSnapshot:
    s = sample_case(case, grid, t)
    return StateSnapshot(s.psi, s.psi_t, s.T, case.nu, case.rho, s.mask, source, t, s)


def snapshot_from_fields(
    psi: ScalarField,
    psi_t: ScalarField,
    T: ScalarField,
    nu: float,
    rho: float,
    mask: NodeMask | None = None,
    t: float = 0.0,
) -> StateSnapshot:
    """Discrete-route snapshot for fields without analytic derivatives (e.g. a solve)."""
    return StateSnapshot(psi, psi_t, T, nu, rho, mask or NodeMask.all_valid(psi.grid), "discrete", t)


@dataclass(frozen=True, eq=False)
class VelocityField:
    u: ScalarField
    w: ScalarField


@dataclass(frozen=True)
class ConsistencyStats:
    C_estimate: float
    spatial_std: float
    spatial_sup_dev: float


def edge_band_mask(grid: AxiGrid, depth: int) -> NodeMask:
    """Nodes at least ``depth`` layers away from r = rmax, z = zmin and z = zmax."""
    ok = np.zeros(grid.shape, dtype=bool)
    ok[: grid.nr - depth, depth : grid.nz - depth] = True
    return NodeMask(grid, ok)


def _valid_mask(s: StateSnapshot, *fields: np.ndarray, composite: bool = False) -> NodeMask:
    """Snapshot mask minus nodes whose stencils reached into an excluded zone."""
    ok = s.mask.valid.copy()
    for a in fields:
        ok &= np.isfinite(a)
    if composite and s.source == "discrete":
        ok &= edge_band_mask(s.grid, COMPOSITE_BAND).valid
    return NodeMask(s.grid, ok)


# -- derivative records -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Derivs:
    """Everything the momentum equations need, as plain arrays."""

    r: np.ndarray
    z: np.ndarray
    rr: np.ndarray
    rz: np.ndarray
    zz: np.ndarray
    # derivatives of u = psi_r and w = psi_z entering the viscous terms
    u_r: np.ndarray
    u_z: np.ndarray
    u_vlap: np.ndarray  # u_rr + u_r/r - u/r^2, zero on the axis
    u_zz: np.ndarray
    w_r: np.ndarray
    w_z: np.ndarray
    w_lap: np.ndarray
    lap: np.ndarray
    t_r: np.ndarray
    t_z: np.ndarray
    T_r: np.ndarray
    T_z: np.ndarray


def _derivatives(s: StateSnapshot) -> _Derivs:
    grid = s.grid
    R = grid.mesh()[0]
    if s.source == "analytic":
        j = s.sample.jet
        f = s.sample.force
        w_lap = axisymmetric_laplacian_from_jet(j.rrz, j.rz, j.zzz, R)
        lap = axisymmetric_laplacian_from_jet(j.rr, j.r, j.zz, R)
        with np.errstate(divide="ignore", invalid="ignore"):
            u_vlap = np.where(R == 0.0, 0.0, j.rrr + j.rr / R - j.r / R**2)
        return _Derivs(
            j.r, j.z, j.rr, j.rz, j.zz,
            u_r=j.rr, u_z=j.rz, u_vlap=u_vlap, u_zz=j.rzz,
            w_r=j.rz, w_z=j.zz, w_lap=w_lap, lap=lap,
            t_r=j.rt, t_z=j.zt, T_r=f.r, T_z=f.z,
        )
    u = diff(s.psi, "r", 1)
    w = diff(s.psi, "z", 1)
    return _Derivs(
        u.values, w.values,
        diff(s.psi, "r", 2).values, diff(u, "z", 1).values, diff(s.psi, "z", 2).values,
        u_r=diff(u, "r", 1, parity="odd").values,
        u_z=diff(u, "z", 1).values,
        u_vlap=_radial_vector_laplacian(u),
        u_zz=diff(u, "z", 2).values,
        w_r=diff(w, "r", 1).values,
        w_z=diff(w, "z", 1).values,
        w_lap=axisymmetric_laplacian(w).values,
        lap=axisymmetric_laplacian(s.psi).values,
        t_r=diff(s.psi_t, "r", 1).values,
        t_z=diff(s.psi_t, "z", 1).values,
        T_r=diff(s.T, "r", 1).values,
        T_z=diff(s.T, "z", 1).values,
    )


def _radial_vector_laplacian(u: ScalarField) -> np.ndarray:
    """``u_rr + u_r/r - u/r^2`` as ``d/dr((1/r) d/dr(r u))`` by composed differences.

    The expanded form loses an order at the first node off the axis because
    ``u_rrr`` is even in r; the conservative form keeps second order there.
    """
    grid = u.grid
    R = grid.mesh()[0]
    ru = ScalarField(grid, R * u.values)
    d_ru = diff(ru, "r", 1).values
    q = np.empty_like(d_ru)
    q[1:] = d_ru[1:] / R[1:]
    # q is even in r: fill the axis by the even quadratic through q_1, q_2 so
    # its truncation error matches the neighbours'
    q[0] = (4.0 * q[1] - q[2]) / 3.0
    return diff(ScalarField(grid, q), "r", 1).values


def _laplacian_gradient(d: _Derivs, R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of ``psi_rr + psi_r/r + psi_zz``; the r-part vanishes on the axis."""
    return np.where(R == 0.0, 0.0, d.u_vlap + d.u_zz), d.w_lap


# -- operations ---------------------------------------------------------------


def velocity_from_potential(s: StateSnapshot) -> VelocityField:
    """``u = psi_r``, ``w = psi_z``."""
    grid = s.grid
    if s.source == "analytic":
        j = s.sample.jet
        return VelocityField(
            ScalarField(grid, j.r, (j.rr, j.rz)), ScalarField(grid, j.z, (j.rz, j.zz))
        )
    return VelocityField(diff(s.psi, "r", 1), diff(s.psi, "z", 1))


def pressure_from_bernoulli(s: StateSnapshot) -> ScalarField:
    """``p = rho (-psi_t - |grad psi|^2/2 + nu lap(psi) - T)`` with ``C(t) = 0``.

    On the analytic route the returned field also carries the exact pressure
    gradient, which the momentum residuals consume.
    """
    d = _derivatives(s)
    rho, nu = s.rho, s.nu
    p = rho * (-s.psi_t.values - 0.5 * (d.r**2 + d.z**2) + nu * d.lap - s.T.values)
    if s.source != "analytic":
        return ScalarField(s.grid, p)
    R = s.grid.mesh()[0]
    lap_r, lap_z = _laplacian_gradient(d, R)
    p_r = rho * (-d.t_r - d.r * d.rr - d.z * d.rz + nu * lap_r - d.T_r)
    p_z = rho * (-d.t_z - d.r * d.rz - d.z * d.zz + nu * lap_z - d.T_z)
    return ScalarField(s.grid, p, (p_r, p_z))


def _pressure_gradient(s: StateSnapshot, p: ScalarField):
    if s.source == "analytic":
        if p.grad is None:
            raise ValueError("analytic route needs a pressure field with a known gradient")
        return p.grad
    return diff(p, "r", 1).values, diff(p, "z", 1).values


class MomentumResiduals(NamedTuple):
    res_r: ScalarField
    res_z: ScalarField
    mask_r: NodeMask
    mask_z: NodeMask


def momentum_residuals(s: StateSnapshot, p: ScalarField) -> MomentumResiduals:
    """Residuals of the radial and axial momentum equations for ``V = grad psi``.

    ``res_r`` is NaN on the axis column, where its ``psi_r / r^2`` term is
    0/0, and ``mask_r`` excludes that column (on the discrete route also the
    first column off the axis).  Discrete masks further drop a band of
    ``COMPOSITE_BAND`` nodes along the Dirichlet sides.
    """
    grid = s.grid
    R = grid.mesh()[0]
    d = _derivatives(s)
    p_r, p_z = _pressure_gradient(s, p)
    nu, rho = s.nu, s.rho
    visc_r = d.u_vlap + d.u_zz
    res_r = d.t_r + d.r * d.u_r + d.z * d.u_z - nu * visc_r + p_r / rho + d.T_r
    res_r = np.where(R == 0.0, np.nan, res_r)
    res_z = d.t_z + d.r * d.w_r + d.z * d.w_z - nu * d.w_lap + p_z / rho + d.T_z
    mask_z = _valid_mask(s, res_z, composite=True)
    mask_r = _valid_mask(s, np.where(R == 0.0, 0.0, res_r), composite=True).without_axis()
    if s.source == "discrete":
        # centred p_r at i=1 straddles the axis Laplacian stencil, whose
        # truncation error does not join smoothly with the interior's
        mask_r = mask_r.without_columns(1)
    return MomentumResiduals(ScalarField(grid, res_r), ScalarField(grid, res_z), mask_r, mask_z)


def bernoulli_function(s: StateSnapshot, p: ScalarField) -> ScalarField:
    """``F = psi_t + |grad psi|^2/2 - nu lap(psi) + p/rho + T``."""
    d = _derivatives(s)
    F = s.psi_t.values + 0.5 * (d.r**2 + d.z**2) - s.nu * d.lap + p.values / s.rho + s.T.values
    return ScalarField(s.grid, F)


def bernoulli_consistency(
    s: StateSnapshot, p: ScalarField
) -> tuple[ScalarField, ConsistencyStats, NodeMask]:
    """Check that ``F`` is spatially constant, i.e. a function of time only."""
    F = bernoulli_function(s, p)
    mask = _valid_mask(s, F.values)
    vals = F.values[mask.valid]
    if vals.size == 0:
        raise ValueError("no valid nodes for the consistency check")
    c = float(np.mean(vals))
    dev = vals - c
    stats = ConsistencyStats(c, float(np.sqrt(np.mean(dev**2))), float(np.max(np.abs(dev))))
    return F, stats, mask


def continuity_residual(s: StateSnapshot) -> tuple[ScalarField, NodeMask]:
    """Divergence of the velocity, on the snapshot's derivative route."""
    if s.source == "analytic":
        d = _derivatives(s)
        div = ScalarField(s.grid, d.lap)
    else:
        v = velocity_from_potential(s)
        div = divergence_axi(v.u, v.w)
    return div, _valid_mask(s, div.values, composite=True)


def vorticity(s: StateSnapshot) -> tuple[ScalarField, NodeMask]:
    """Azimuthal vorticity ``u_z - w_r``, on the snapshot's derivative route."""
    if s.source == "analytic":
        d = _derivatives(s)
        curl = ScalarField(s.grid, d.u_z - d.w_r)
    else:
        v = velocity_from_potential(s)
        curl = curl_theta(v.u, v.w)
    return curl, _valid_mask(s, curl.values, composite=True)


def sum_uw(v: VelocityField) -> ScalarField:
    """``u + w``, which a surrogate equation would force to vanish."""
    return ScalarField(v.u.grid, v.u.values + v.w.values)
