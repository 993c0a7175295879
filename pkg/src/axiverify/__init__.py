"""Verification toolkit for axisymmetric potential flow.

Covers the harmonic velocity potential, Bernoulli pressure recovery, the
Cole-Hopf substitution ``psi = -2 nu log(phi)`` and residual checks that
separate the correct axisymmetric phi-equation from two erroneous variants.
"""

from axiverify.grid import AxiGrid, NodeMask, ScalarField, build_grid, field_norms, sample_case
from axiverify.cases import (
    FlowCase,
    eval_case,
    modulate_time,
    rest_case,
    source_case,
    stagnation_case,
    superpose,
    uniform_case,
)

__all__ = [
    "AxiGrid",
    "FlowCase",
    "NodeMask",
    "ScalarField",
    "build_grid",
    "eval_case",
    "field_norms",
    "modulate_time",
    "rest_case",
    "sample_case",
    "source_case",
    "stagnation_case",
    "superpose",
    "uniform_case",
]

__version__ = "0.1.0"
