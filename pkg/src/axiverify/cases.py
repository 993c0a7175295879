"""Manufactured axisymmetric potentials and conservative force potentials.

Every potential supplies a full derivative jet up to third order in space and
first order in time, so residuals of the component momentum equations can be
evaluated without any differencing.  All catalog potentials are harmonic in
the axisymmetric sense, ``psi_rr + psi_r/r + psi_zz = 0``.

Gauge: ``psi`` is only defined up to an additive constant.  The catalog pins it
so that ``psi(0, 0) = 0`` for the uniform and stagnation flows, and so that
``psi -> 0`` far from the source for the point source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class PotentialJet:
    """Values of psi and its derivatives at a set of points."""

    psi: np.ndarray
    r: np.ndarray
    z: np.ndarray
    rr: np.ndarray
    rz: np.ndarray
    zz: np.ndarray
    rrr: np.ndarray
    rrz: np.ndarray
    rzz: np.ndarray
    zzz: np.ndarray
    t: np.ndarray
    rt: np.ndarray
    zt: np.ndarray

    def scaled(self, c: float) -> PotentialJet:
        return PotentialJet(*(c * getattr(self, f.name) for f in fields(self)))

    def __add__(self, other: PotentialJet) -> PotentialJet:
        return PotentialJet(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))


@dataclass(frozen=True)
class ForceJet:
    T: np.ndarray
    r: np.ndarray
    z: np.ndarray

    def scaled(self, c: float) -> ForceJet:
        return ForceJet(c * self.T, c * self.r, c * self.z)

    def __add__(self, other: ForceJet) -> ForceJet:
        return ForceJet(self.T + other.T, self.r + other.r, self.z + other.z)


def _zeros_like(r, z) -> np.ndarray:
    return np.zeros(np.broadcast(np.asarray(r, float), np.asarray(z, float)).shape)


def _zero_jet(r, z) -> PotentialJet:
    zero = _zeros_like(r, z)
    return PotentialJet(*([zero] * len(fields(PotentialJet))))


# -- potentials ---------------------------------------------------------------


@dataclass(frozen=True)
class ZeroPotential:
    def jet(self, r, z, t: float) -> PotentialJet:
        return _zero_jet(r, z)


@dataclass(frozen=True)
class UniformPotential:
    """Uniform axial stream ``psi = U z``."""

    U: float = 1.0

    def jet(self, r, z, t: float) -> PotentialJet:
        zero = _zeros_like(r, z)
        z = np.asarray(z, float) + zero
        return replace(_zero_jet(r, z), psi=self.U * z, z=self.U + zero)


@dataclass(frozen=True)
class StagnationPotential:
    """Axisymmetric stagnation-point flow ``psi = A (z^2 - r^2/2)``."""

    A: float = 1.0

    def jet(self, r, z, t: float) -> PotentialJet:
        zero = _zeros_like(r, z)
        r = np.asarray(r, float) + zero
        z = np.asarray(z, float) + zero
        A = self.A
        return replace(
            _zero_jet(r, z),
            psi=A * (z**2 - 0.5 * r**2),
            r=-A * r,
            z=2.0 * A * z,
            rr=-A + zero,
            zz=2.0 * A + zero,
        )


@dataclass(frozen=True)
class SourcePotential:
    """Point source of strength ``m`` on the axis at ``z = z0``.

    ``psi = -m / (4 pi s)`` with ``s = sqrt(r^2 + (z - z0)^2)``.
    """

    m: float = 1.0
    z0: float = 0.0

    def jet(self, r, z, t: float) -> PotentialJet:
        zero = _zeros_like(r, z)
        r = np.asarray(r, float) + zero
        q = np.asarray(z, float) - self.z0 + zero
        k = -self.m / (4.0 * math.pi)
        with np.errstate(divide="ignore", invalid="ignore"):
            s2 = r**2 + q**2
            s = np.sqrt(s2)
            s3 = s * s2
            s5 = s3 * s2
            s7 = s5 * s2
            return replace(
                _zero_jet(r, z),
                psi=k / s,
                r=-k * r / s3,
                z=-k * q / s3,
                rr=k * (3.0 * r**2 / s5 - 1.0 / s3),
                rz=k * 3.0 * r * q / s5,
                zz=k * (3.0 * q**2 / s5 - 1.0 / s3),
                rrr=k * (9.0 * r / s5 - 15.0 * r**3 / s7),
                rrz=k * (3.0 * q / s5 - 15.0 * r**2 * q / s7),
                rzz=k * (3.0 * r / s5 - 15.0 * r * q**2 / s7),
                zzz=k * (9.0 * q / s5 - 15.0 * q**3 / s7),
            )


@dataclass(frozen=True)
class LinearCombination:
    terms: tuple[tuple[float, object], ...]

    def jet(self, r, z, t: float):
        jets = [p.jet(r, z, t).scaled(c) for c, p in self.terms]
        total = jets[0]
        for j in jets[1:]:
            total = total + j
        return total


@dataclass(frozen=True)
class Envelope:
    """Time factor ``g(t)`` together with its derivative."""

    name: str
    g: Callable[[float], float]
    dg: Callable[[float], float]


def cos_envelope(omega: float = 1.0) -> Envelope:
    return Envelope(
        f"cos({omega:g}t)",
        lambda t: math.cos(omega * t),
        lambda t: -omega * math.sin(omega * t),
    )


def exp_envelope(rate: float = 1.0) -> Envelope:
    return Envelope(
        f"exp(-{rate:g}t)",
        lambda t: math.exp(-rate * t),
        lambda t: -rate * math.exp(-rate * t),
    )


@dataclass(frozen=True)
class ModulatedPotential:
    base: object
    envelope: Envelope

    def jet(self, r, z, t: float) -> PotentialJet:
        b = self.base.jet(r, z, t)
        g = self.envelope.g(t)
        dg = self.envelope.dg(t)
        out = b.scaled(g)
        return replace(
            out,
            t=dg * b.psi + g * b.t,
            rt=dg * b.r + g * b.rt,
            zt=dg * b.z + g * b.zt,
        )


# -- force potentials ---------------------------------------------------------


@dataclass(frozen=True)
class ZeroForce:
    def jet(self, r, z, t: float) -> ForceJet:
        zero = _zeros_like(r, z)
        return ForceJet(zero, zero, zero)


@dataclass(frozen=True)
class GravityForce:
    """``T = g z``, i.e. a body force ``f = (0, 0, -g)``."""

    g: float = 9.8

    def jet(self, r, z, t: float) -> ForceJet:
        zero = _zeros_like(r, z)
        return ForceJet(self.g * (np.asarray(z, float) + zero), zero, self.g + zero)


@dataclass(frozen=True)
class UniformShiftForce:
    """Spatially constant ``T = c(t)``; carries no force, only a gauge shift."""

    c: Callable[[float], float]

    def jet(self, r, z, t: float) -> ForceJet:
        zero = _zeros_like(r, z)
        return ForceJet(self.c(t) + zero, zero, zero)


# -- flow cases ---------------------------------------------------------------


@dataclass(frozen=True)
class Singularity:
    """Point where the analytic potential is unbounded.

    ``radius=None`` defers to the grid default of ``3 * max(hr, hz)``.
    """

    r: float
    z: float
    radius: float | None = None


@dataclass(frozen=True)
class FlowCase:
    name: str
    potential: object
    force: object = field(default_factory=ZeroForce)
    nu: float = 1.0
    rho: float = 1.0
    singularities: tuple[Singularity, ...] = ()
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise ValueError(f"viscosity nu must be positive and finite, got {self.nu!r}")
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"density rho must be positive and finite, got {self.rho!r}")

    def psi_jet(self, r, z, t: float) -> PotentialJet:
        return self.potential.jet(r, z, t)

    def force_jet(self, r, z, t: float) -> ForceJet:
        return self.force.jet(r, z, t)

    def with_force(self, force, name: str | None = None) -> FlowCase:
        return replace(self, force=force, name=name or self.name)


def uniform_case(U: float = 1.0, *, nu: float = 1.0, rho: float = 1.0, force=None) -> FlowCase:
    return FlowCase("uniform", UniformPotential(U), force or ZeroForce(), nu, rho, params={"U": U})


def stagnation_case(A: float = 1.0, *, nu: float = 1.0, rho: float = 1.0, force=None) -> FlowCase:
    return FlowCase("stagnation", StagnationPotential(A), force or ZeroForce(), nu, rho, params={"A": A})


def source_case(
    m: float = 1.0,
    z0: float = -0.5,
    *,
    nu: float = 1.0,
    rho: float = 1.0,
    force=None,
    exclusion: float | None = None,
) -> FlowCase:
    return FlowCase(
        "source",
        SourcePotential(m, z0),
        force or ZeroForce(),
        nu,
        rho,
        (Singularity(0.0, z0, exclusion),),
        params={"m": m, "z0": z0},
    )


def rest_case(*, nu: float = 1.0, rho: float = 1.0, force=None) -> FlowCase:
    """Fluid at rest, ``psi = 0``; with gravity forcing this is hydrostatics."""
    return FlowCase("rest", ZeroPotential(), force or ZeroForce(), nu, rho)


def superpose(a: FlowCase, b: FlowCase, ca: float, cb: float) -> FlowCase:
    """Linear combination ``ca*a + cb*b`` of two cases sharing nu and rho."""
    if a.nu != b.nu or a.rho != b.rho:
        raise ValueError(
            f"cannot superpose cases with different nu/rho: ({a.nu}, {a.rho}) vs ({b.nu}, {b.rho})"
        )
    return FlowCase(
        f"{ca:g}*{a.name}+{cb:g}*{b.name}",
        LinearCombination(((ca, a.potential), (cb, b.potential))),
        LinearCombination(((ca, a.force), (cb, b.force))),
        a.nu,
        a.rho,
        a.singularities + b.singularities,
    )


def modulate_time(base: FlowCase, envelope: Envelope) -> FlowCase:
    """Multiply the whole potential by ``envelope.g(t)``; the force is unchanged."""
    return replace(
        base,
        name=f"{envelope.name}*{base.name}",
        potential=ModulatedPotential(base.potential, envelope),
    )


# -- pointwise evaluation -----------------------------------------------------


@dataclass(frozen=True)
class CaseValues:
    psi: float
    psi_r: float
    psi_z: float
    psi_rr: float
    psi_zz: float
    psi_t: float
    T: float
    T_r: float
    T_z: float
    # radius of the evaluation point, needed for the axis limit
    _r: float = 0.0

    @property
    def laplacian(self) -> float:
        return float(axisymmetric_laplacian_from_jet(self.psi_rr, self.psi_r, self.psi_zz, self._r))


# Below this radius f_r/r and f_rr agree to far beyond double precision, while
# f_r itself may already be subnormal and have lost its significant digits.
AXIS_LIMIT_RADIUS = 1e-150


def axisymmetric_laplacian_from_jet(rr, r_deriv, zz, r):
    """``f_rr + f_r/r + f_zz`` with the axis limit ``2 f_rr + f_zz`` at r = 0."""
    r = np.asarray(r, float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        off_axis = rr + r_deriv / r + zz
    return np.where(r < AXIS_LIMIT_RADIUS, 2.0 * rr + zz, off_axis)


def check_outside_singularities(case: FlowCase, r, z, default_radius: float = 0.0) -> np.ndarray:
    """Boolean array: True where (r, z) is outside every exclusion zone."""
    r = np.asarray(r, float)
    z = np.asarray(z, float)
    ok = np.ones(np.broadcast(r, z).shape, dtype=bool)
    for s in case.singularities:
        radius = default_radius if s.radius is None else s.radius
        dist = np.hypot(r - s.r, z - s.z)
        ok &= (dist > radius) if radius > 0 else (dist > 0)
    return ok


def eval_case(case: FlowCase, r: float, z: float, t: float = 0.0) -> CaseValues:
    """Analytic values of psi, its derivatives and the force potential at one point."""
    if not (math.isfinite(r) and math.isfinite(z) and math.isfinite(t)):
        raise ValueError(f"non-finite evaluation point ({r}, {z}, t={t})")
    if r < 0:
        raise ValueError(f"radius must be non-negative, got r={r}")
    if not check_outside_singularities(case, r, z):
        raise ValueError(f"({r}, {z}) lies inside an exclusion zone of case {case.name!r}")
    p = case.psi_jet(r, z, t)
    f = case.force_jet(r, z, t)
    out = CaseValues(
        float(p.psi), float(p.r), float(p.z), float(p.rr), float(p.zz), float(p.t),
        float(f.T), float(f.r), float(f.z), _r=float(r),
    )
    if not all(math.isfinite(getattr(out, k.name)) for k in fields(out)):
        raise ValueError(f"non-finite analytic value for case {case.name!r} at ({r}, {z})")
    return out
