"""Second-order finite differences on axisymmetric node fields.

Interior nodes use centered stencils.  The outer radial edge and both axial
edges use one-sided second-order stencils (three points for first
derivatives, four points for second derivatives when the direction has at
least four nodes).  Radial derivatives at the axis column use a ghost node
mirrored across r = 0: even parity for scalars such as psi, phi, p and the
axial velocity; odd parity for the radial velocity.
"""

from __future__ import annotations

import numpy as np

from axiverify.grid import ScalarField

_AXES = {"r": 0, "z": 1}


def _d1(a: np.ndarray, h: float, axis: int, parity: str | None) -> np.ndarray:
    a = np.moveaxis(a, axis, 0)
    out = np.empty_like(a)
    out[1:-1] = (a[2:] - a[:-2]) / (2.0 * h)
    out[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) / (2.0 * h)
    if parity == "even":
        out[0] = 0.0
    elif parity == "odd":
        out[0] = a[1] / h
    else:
        out[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def _d2(a: np.ndarray, h: float, axis: int, parity: str | None) -> np.ndarray:
    a = np.moveaxis(a, axis, 0)
    out = np.empty_like(a)
    h2 = h * h
    out[1:-1] = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / h2
    if a.shape[0] >= 4:
        out[-1] = (2.0 * a[-1] - 5.0 * a[-2] + 4.0 * a[-3] - a[-4]) / h2
        low = (2.0 * a[0] - 5.0 * a[1] + 4.0 * a[2] - a[3]) / h2
    else:
        out[-1] = (a[-1] - 2.0 * a[-2] + a[-3]) / h2
        low = (a[0] - 2.0 * a[1] + a[2]) / h2
    if parity == "even":
        out[0] = 2.0 * (a[1] - a[0]) / h2
    elif parity == "odd":
        out[0] = -2.0 * a[0] / h2
    else:
        out[0] = low
    return np.moveaxis(out, 0, axis)


def diff(f: ScalarField, axis: str, order: int, parity: str = "even") -> ScalarField:
    """Derivative of ``f`` along ``axis`` ('r' or 'z') of order 1 or 2.

    ``parity`` selects the ghost used at the axis column for r-derivatives and
    is ignored for z-derivatives.
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be 'r' or 'z', got {axis!r}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    grid = f.grid
    ax = _AXES[axis]
    if grid.shape[ax] < 3:
        raise ValueError(f"need at least 3 nodes along {axis}")
    h = grid.hr if axis == "r" else grid.hz
    ghost = parity if axis == "r" else None
    op = _d1 if order == 1 else _d2
    return ScalarField(grid, op(f.values, h, ax, ghost))


def _over_r(grid, a: np.ndarray) -> np.ndarray:
    """``a / r`` off the axis; the axis column is left as zero."""
    out = np.zeros_like(a)
    out[1:] = a[1:] / grid.r[1:, None]
    return out


def axisymmetric_laplacian(f: ScalarField) -> ScalarField:
    """``f_rr + f_r/r + f_zz``; ``2 f_rr + f_zz`` on the axis."""
    grid = f.grid
    frr = diff(f, "r", 2).values
    fr = diff(f, "r", 1).values
    fzz = diff(f, "z", 2).values
    out = frr + _over_r(grid, fr) + fzz
    out[0] = 2.0 * frr[0] + fzz[0]
    return ScalarField(grid, out)


def laplacian_missing_axis_term(f: ScalarField) -> ScalarField:
    """The planar operator ``f_rr + f_zz``, wrongly used as the axisymmetric one."""
    return ScalarField(f.grid, diff(f, "r", 2).values + diff(f, "z", 2).values)


def divergence_axi(u: ScalarField, w: ScalarField) -> ScalarField:
    """``u_r + u/r + w_z`` for a swirl-free axisymmetric velocity (u odd in r)."""
    if u.grid != w.grid:
        raise ValueError("velocity components live on different grids")
    grid = u.grid
    ur = diff(u, "r", 1, parity="odd").values
    wz = diff(w, "z", 1).values
    out = ur + _over_r(grid, u.values) + wz
    out[0] = 2.0 * ur[0] + wz[0]
    return ScalarField(grid, out)


def curl_theta(u: ScalarField, w: ScalarField) -> ScalarField:
    """Azimuthal vorticity ``u_z - w_r``."""
    if u.grid != w.grid:
        raise ValueError("velocity components live on different grids")
    return ScalarField(u.grid, diff(u, "z", 1).values - diff(w, "r", 1).values)
