import math
import zlib

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from axiverify import eval_case, modulate_time, source_case, stagnation_case, superpose, uniform_case
from axiverify.cases import GravityForce, cos_envelope, exp_envelope
from helpers import catalog


def _random_points(rng, n, rmax=1.0, zmin=0.0, zmax=1.0):
    r = rng.uniform(0.0, rmax, n)
    r[:20] = 0.0  # the axis limit gets its own share of draws
    return r, rng.uniform(zmin, zmax, n)


@pytest.mark.parametrize("name", list(catalog()))
def test_harmonic_at_random_points(name):
    case = catalog()[name]
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    r, z = _random_points(rng, 1000)
    t = rng.uniform(0, 3)
    worst = max(abs(eval_case(case, float(a), float(b), t).laplacian) for a, b in zip(r, z))
    assert worst <= 1e-12


@pytest.mark.parametrize("name", list(catalog()))
def test_axis_symmetry(name):
    case = catalog()[name]
    for z in np.linspace(0, 1, 11):
        assert eval_case(case, 0.0, float(z), 0.7).psi_r == 0.0


def _close(a, b, rtol=1e-7):
    return abs(a - b) <= rtol * max(abs(b), 1.0)


@pytest.mark.parametrize("name", list(catalog()))
def test_derivatives_match_central_differences(name):
    # First derivatives against differences of psi.  Second derivatives against
    # differences of the (already checked) first derivatives: centered second
    # differences of psi at step 1e-5 carry ~1e-6 roundoff and cannot resolve 1e-7.
    case = catalog()[name]
    h = 1e-5
    rng = np.random.default_rng(7)
    for r, z in zip(rng.uniform(0.05, 1.0, 40), rng.uniform(0.0, 1.0, 40)):
        t = float(rng.uniform(0, 2))
        r, z = float(r), float(z)
        v = eval_case(case, r, z, t)

        def at(dr=0.0, dz=0.0, dt=0.0):
            return eval_case(case, r + dr, z + dz, t + dt)

        assert _close(v.psi_r, (at(dr=h).psi - at(dr=-h).psi) / (2 * h))
        assert _close(v.psi_z, (at(dz=h).psi - at(dz=-h).psi) / (2 * h))
        assert _close(v.psi_t, (at(dt=h).psi - at(dt=-h).psi) / (2 * h))
        assert _close(v.psi_rr, (at(dr=h).psi_r - at(dr=-h).psi_r) / (2 * h))
        assert _close(v.psi_zz, (at(dz=h).psi_z - at(dz=-h).psi_z) / (2 * h))
        assert _close(v.T_r, (at(dr=h).T - at(dr=-h).T) / (2 * h))
        assert _close(v.T_z, (at(dz=h).T - at(dz=-h).T) / (2 * h))


def test_source_jet_against_symbolic_oracle():
    r, z, m, z0 = sp.symbols("r z m z0", real=True)
    psi = -m / (4 * sp.pi * sp.sqrt(r**2 + (z - z0) ** 2))
    wanted = {
        "psi": psi,
        "r": sp.diff(psi, r),
        "z": sp.diff(psi, z),
        "rr": sp.diff(psi, r, 2),
        "rz": sp.diff(psi, r, z),
        "zz": sp.diff(psi, z, 2),
        "rrr": sp.diff(psi, r, 3),
        "rrz": sp.diff(psi, r, 2, z),
        "rzz": sp.diff(psi, r, z, 2),
        "zzz": sp.diff(psi, z, 3),
    }
    fns = {k: sp.lambdify((r, z, m, z0), e, "numpy") for k, e in wanted.items()}
    rng = np.random.default_rng(3)
    R, Z = rng.uniform(0, 1, 200), rng.uniform(0, 1, 200)
    for mv, z0v in ((1.0, -0.5), (4 * math.pi, 0.0), (-2.5, 1.7)):
        jet = source_case(mv, z0v).psi_jet(R, Z, 0.0)
        for k, f in fns.items():
            np.testing.assert_allclose(getattr(jet, k), f(R, Z, mv, z0v), rtol=1e-12, atol=1e-14, err_msg=k)


def test_stagnation_example():
    v = eval_case(stagnation_case(1.0), 1.0, 1.0, 5.0)
    assert (v.psi_r, v.psi_z, v.psi_rr, v.psi_zz) == (-1.0, 2.0, -1.0, 2.0)
    assert v.laplacian == 0.0
    assert v.psi == 0.5


def test_uniform_example():
    v = eval_case(uniform_case(1.0), 0.3, 0.8)
    assert (v.psi_r, v.psi_z, v.psi_rr, v.psi_zz, v.psi_t) == (0.0, 1.0, 0.0, 0.0, 0.0)


def test_source_example():
    v = eval_case(source_case(4 * math.pi, 0.0), 0.0, 1.0)
    assert v.psi == pytest.approx(-1.0, abs=1e-15)
    assert v.psi_z == pytest.approx(1.0, abs=1e-15)
    assert v.psi_r == 0.0


def test_gauge_pins():
    assert eval_case(uniform_case(2.0), 0.0, 0.0).psi == 0.0
    assert eval_case(stagnation_case(3.0), 0.0, 0.0).psi == 0.0
    far = eval_case(source_case(1.0, 0.0), 0.0, 1e12).psi
    assert abs(far) < 1e-12


def test_eval_errors():
    case = source_case(1.0, 0.0, exclusion=0.1)
    with pytest.raises(ValueError, match="exclusion"):
        eval_case(case, 0.05, 0.0)
    with pytest.raises(ValueError):
        eval_case(source_case(1.0, 0.0), 0.0, 0.0)
    with pytest.raises(ValueError):
        eval_case(uniform_case(), -0.1, 0.0)
    with pytest.raises(ValueError):
        eval_case(uniform_case(), math.nan, 0.0)


@pytest.mark.parametrize("nu,rho", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (math.nan, 1.0), (1.0, math.inf)])
def test_invalid_parameters(nu, rho):
    with pytest.raises(ValueError):
        uniform_case(nu=nu, rho=rho)


def test_superpose_examples():
    s = superpose(uniform_case(1.0), stagnation_case(1.0), 1.0, 1.0)
    v = eval_case(s, 1.0, 1.0)
    assert v.psi == 1.5 and v.laplacian == 0.0

    x = source_case(1.0, -0.5, force=GravityForce(3.0))
    zero = superpose(x, x, 1.0, -1.0)
    rng = np.random.default_rng(1)
    for r, z in zip(rng.uniform(0, 1, 50), rng.uniform(0, 1, 50)):
        v = eval_case(zero, float(r), float(z), 0.3)
        assert (v.psi, v.psi_r, v.psi_z, v.psi_rr, v.psi_zz, v.psi_t, v.T) == (0.0,) * 7


@settings(max_examples=100, deadline=None)
@given(r=st.floats(0, 1), z=st.floats(0, 1))
def test_superpose_uniform_source_harmonic(r, z):
    s = superpose(uniform_case(1.0), source_case(1.0, -0.5), 2.0, 3.0)
    assert abs(eval_case(s, r, z).laplacian) <= 1e-12


def test_superpose_combines_everything():
    a = uniform_case(1.0, force=GravityForce(2.0))
    b = source_case(1.0, -0.5, force=GravityForce(1.0))
    s = superpose(a, b, 2.0, 3.0)
    va, vb, vs = (eval_case(c, 0.4, 0.6) for c in (a, b, s))
    for k in ("psi", "psi_r", "psi_z", "psi_rr", "psi_zz", "T", "T_z"):
        assert getattr(vs, k) == pytest.approx(2 * getattr(va, k) + 3 * getattr(vb, k), rel=1e-15, abs=1e-15)
    assert s.singularities == b.singularities


def test_superpose_mismatch():
    with pytest.raises(ValueError):
        superpose(uniform_case(nu=1.0), stagnation_case(nu=2.0), 1.0, 1.0)
    with pytest.raises(ValueError):
        superpose(uniform_case(rho=1.0), stagnation_case(rho=2.0), 1.0, 1.0)


def test_modulate_examples():
    c = modulate_time(uniform_case(1.0), cos_envelope())
    v = eval_case(c, 0.0, 1.0, 0.0)
    assert (v.psi, v.psi_t) == (1.0, 0.0)
    v = eval_case(c, 0.0, 1.0, math.pi / 2)
    assert v.psi == pytest.approx(0.0, abs=1e-15)
    assert v.psi_t == pytest.approx(-1.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(t=st.floats(-10, 10), r=st.floats(0, 1), z=st.floats(0, 1), rate=st.floats(-1, 1))
def test_modulated_stays_harmonic(t, r, z, rate):
    for env in (cos_envelope(2.0), exp_envelope(rate)):
        c = modulate_time(stagnation_case(1.0), env)
        v = eval_case(c, r, z, t)
        base = eval_case(stagnation_case(1.0), r, z, t)
        assert abs(v.laplacian) <= 1e-12
        assert v.psi == pytest.approx(env.g(t) * base.psi, rel=1e-14, abs=1e-300)
        assert v.psi_t == pytest.approx(env.dg(t) * base.psi, rel=1e-14, abs=1e-300)


@pytest.mark.parametrize("r", [5e-324, 2.2250738585e-313, 1e-300, 1e-160])
def test_laplacian_near_axis_radii(r):
    for case in (stagnation_case(1.0), superpose(uniform_case(1.0), source_case(1.0, -0.5), 2.0, 3.0)):
        assert abs(eval_case(case, r, 0.3).laplacian) <= 1e-12
