"""Cole-Hopf substitution ``psi = -2 nu log(phi)`` and the phi-form residuals.

Under the substitution, the Bernoulli relation for psi becomes

    phi_t - nu (phi_rr + phi_r/r + phi_zz) = phi/(2 nu) (p/rho + T)

which is linear in phi only because p is an unknown recovered from psi.  The
``erroneous`` variant drops the ``phi_r/r`` term; it differs from the correct
one by ``nu phi_r / r`` and so fails on any flow with radial velocity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from axiverify.diffops import axisymmetric_laplacian, diff, laplacian_missing_axis_term
from axiverify.grid import NodeMask, ScalarField
from axiverify.physics import StateSnapshot, VelocityField

# |psi| / (2 nu) beyond this is not representable through exp in double precision
EXPONENT_LIMIT = 500.0

VARIANTS = ("correct", "erroneous")


class TransformError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PhiField:
    phi: ScalarField
    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise TransformError(f"nu must be positive, got {self.nu}")


def _first_offender(bad: np.ndarray, grid) -> str:
    i, j = np.argwhere(bad)[0]
    return f"node ({i}, {j}) at r={grid.r[i]:g}, z={grid.z[j]:g}"


def psi_to_phi(psi: ScalarField, nu: float, mask: NodeMask | None = None) -> PhiField:
    if not nu > 0:
        raise TransformError(f"nu must be positive, got {nu}")
    valid = np.ones(psi.grid.shape, bool) if mask is None else mask.valid
    expo = -psi.values / (2.0 * nu)
    bad = valid & ~(np.abs(expo) <= EXPONENT_LIMIT)
    if bad.any():
        raise TransformError(
            f"|psi|/(2 nu) exceeds {EXPONENT_LIMIT:g} at {_first_offender(bad, psi.grid)}"
        )
    with np.errstate(over="ignore", invalid="ignore"):
        phi = np.exp(expo)
    return PhiField(ScalarField(psi.grid, phi), nu)


def phi_to_psi(phi: PhiField, mask: NodeMask | None = None) -> ScalarField:
    vals = phi.phi.values
    valid = np.ones(vals.shape, bool) if mask is None else mask.valid
    bad = valid & ~(vals > 0)
    if bad.any():
        raise TransformError(f"phi must be positive, not at {_first_offender(bad, phi.phi.grid)}")
    with np.errstate(divide="ignore", invalid="ignore"):
        return ScalarField(phi.phi.grid, -2.0 * phi.nu * np.log(vals))


@dataclass(frozen=True, eq=False)
class PhiDerivatives:
    phi: np.ndarray
    t: np.ndarray
    r: np.ndarray
    z: np.ndarray
    rr: np.ndarray
    zz: np.ndarray


def phi_derivatives(s: StateSnapshot) -> PhiDerivatives:
    """phi and its derivatives on the snapshot's derivative route.

    ``phi_t`` always follows from ``psi_t`` through the chain rule.
    """
    nu = s.nu
    phi = psi_to_phi(s.psi, nu, s.mask).phi
    a = 2.0 * nu
    phi_t = -s.psi_t.values * phi.values / a
    if s.source == "analytic":
        j = s.sample.jet
        f = phi.values
        return PhiDerivatives(
            f,
            phi_t,
            -j.r * f / a,
            -j.z * f / a,
            (j.r**2 / a**2 - j.rr / a) * f,
            (j.z**2 / a**2 - j.zz / a) * f,
        )
    return PhiDerivatives(
        phi.values,
        phi_t,
        diff(phi, "r", 1).values,
        diff(phi, "z", 1).values,
        diff(phi, "r", 2).values,
        diff(phi, "z", 2).values,
    )


def _laplacians(s: StateSnapshot, d: PhiDerivatives) -> tuple[np.ndarray, np.ndarray]:
    """(axisymmetric, planar) Laplacians of phi on the snapshot's route."""
    if s.source == "discrete":
        phi = ScalarField(s.grid, d.phi)
        return axisymmetric_laplacian(phi).values, laplacian_missing_axis_term(phi).values
    R = s.grid.mesh()[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        correct = d.rr + d.r / R + d.zz
    correct = np.where(R == 0.0, 2.0 * d.rr + d.zz, correct)
    return correct, d.rr + d.zz


def phi_equation_residual(s: StateSnapshot, p: ScalarField, variant: str = "correct") -> ScalarField:
    """LHS minus RHS of the phi-equation; ``variant='erroneous'`` drops ``phi_r/r``."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    d = phi_derivatives(s)
    lap, planar = _laplacians(s, d)
    op = lap if variant == "correct" else planar
    rhs = d.phi / (2.0 * s.nu) * (p.values / s.rho + s.T.values)
    return ScalarField(s.grid, d.t - s.nu * op - rhs)


def uw_transform_identity_gap(v: VelocityField, phi: PhiField, s: StateSnapshot | None = None) -> ScalarField:
    """``|(u + w) + 2 nu (phi_r + phi_z) / phi|``, which vanishes identically.

    phi's derivatives come from the snapshot's route when ``s`` is given
    (analytic chain rule or differences of phi), otherwise from differences.
    """
    if s is not None:
        d = phi_derivatives(s)
        phi_r, phi_z, f = d.r, d.z, d.phi
    else:
        f = phi.phi.values
        phi_r = diff(phi.phi, "r", 1).values
        phi_z = diff(phi.phi, "z", 1).values
    gap = v.u.values + v.w.values + 2.0 * phi.nu * (phi_r + phi_z) / f
    return ScalarField(v.u.grid, np.abs(gap))
