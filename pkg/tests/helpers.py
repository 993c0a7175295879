"""Shared builders for the test suite."""

from __future__ import annotations

import math

import numpy as np

from axiverify import (
    build_grid,
    modulate_time,
    rest_case,
    source_case,
    stagnation_case,
    superpose,
    uniform_case,
)
from axiverify.cases import GravityForce, cos_envelope, exp_envelope


def unit_grid(n: int = 17, nz: int | None = None, zmin: float = 0.0, zmax: float = 1.0):
    return build_grid(n, nz or n, 1.0, zmin, zmax)


def catalog(nu: float = 0.5, rho: float = 1.0, rng: np.random.Generator | None = None) -> dict:
    """The named catalog cases plus one random superposition and two modulated flows."""
    rng = rng or np.random.default_rng(0)
    kw = dict(nu=nu, rho=rho)
    cases = {
        "uniform": uniform_case(1.3, **kw),
        "stagnation": stagnation_case(0.8, **kw),
        "source": source_case(2.0, -0.5, **kw),
        "hydrostatic": rest_case(**kw, force=GravityForce(9.8)),
        "cos*stagnation": modulate_time(stagnation_case(1.0, **kw), cos_envelope(2.0)),
        "exp*source": modulate_time(source_case(1.0, -0.4, **kw), exp_envelope(-0.5)),
    }
    a, b, c = rng.uniform(-1.5, 1.5, size=3)
    mix = superpose(uniform_case(1.0, **kw), stagnation_case(1.0, **kw), a, b)
    mix = superpose(mix, source_case(1.5, -0.6, **kw, force=GravityForce(rng.uniform(0, 10))), 1.0, c)
    cases["random-mix"] = mix
    return cases


def orders(errors) -> list[float]:
    return [math.log2(a / b) for a, b in zip(errors, errors[1:])]


# one "[PASS]/[FAIL] criterion N: ..." line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
