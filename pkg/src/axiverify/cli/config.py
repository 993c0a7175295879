"""Flat ``section.key = value`` run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from axiverify.cases import (
    FlowCase,
    GravityForce,
    ZeroForce,
    cos_envelope,
    exp_envelope,
    modulate_time,
    rest_case,
    source_case,
    stagnation_case,
    superpose,
    uniform_case,
)
from axiverify.grid import AxiGrid, build_grid
from axiverify.solver import SolveParams

CASE_NAMES = ("uniform", "stagnation", "source", "rest")

# every accepted key with its default; None means "unset"
DEFAULTS: dict[str, object] = {
    "case.name": "stagnation",
    "case.U": 1.0,
    "case.A": 1.0,
    "case.m": 1.0,
    "case.z0": -0.5,
    "case.g": 0.0,
    "case.envelope": "none",
    "case.omega": 1.0,
    "case.nu": 0.5,
    "case.rho": 1.0,
    "case.exclusion": None,
    "time.t": 0.0,
    "grid.nr": 33,
    "grid.nz": 33,
    "grid.rmax": 1.0,
    "grid.zmin": 0.0,
    "grid.zmax": 1.0,
    "solver.tol": 1e-10,
    "solver.max_iter": None,
    "solver.initial_guess": "zeros",
    "derivatives.source": "analytic",
    "psi.source": "sample",
    "thresholds.analytic": 1e-10,
    "thresholds.discrete_factor": 50.0,
    "study.levels": "17,33,65",
}

THRESHOLD_KEYS = ("eq6_r", "eq7_z", "continuity", "curl", "eq10_F_supdev", "eq11_correct", "uw_identity_gap")

INT_KEYS = {"grid.nr", "grid.nz", "solver.max_iter"}
STR_KEYS = {"case.name", "case.envelope", "solver.initial_guess", "derivatives.source", "psi.source", "study.levels"}


class ConfigError(ValueError):
    pass


def parse_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def _coerce(key: str, value: str):
    if value in ("", "none", "None") and DEFAULTS.get(key, 0) is None:
        return None
    if key in STR_KEYS:
        return value
    try:
        if key in INT_KEYS:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as a number") from None


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    @classmethod
    def resolve(cls, text: str | None = None, overrides: list[str] | None = None) -> RunConfig:
        raw = parse_text(text) if text else {}
        for item in overrides or []:
            if "=" not in item:
                raise ConfigError(f"--set expects key=value, got {item!r}")
            k, v = (s.strip() for s in item.split("=", 1))
            raw[k] = v
        values = dict(DEFAULTS)
        for key, value in raw.items():
            if key.startswith("thresholds.") and key[len("thresholds."):] in THRESHOLD_KEYS:
                values[key] = _coerce(key, value)
            elif key in DEFAULTS:
                values[key] = _coerce(key, value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        cfg = cls(values)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path | None, overrides: list[str] | None = None) -> RunConfig:
        text = None
        if path is not None:
            try:
                text = Path(path).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.resolve(text, overrides)

    def validate(self) -> None:
        v = self.values
        for name in v["case.name"].split("+"):
            if name.strip() not in CASE_NAMES:
                raise ConfigError(f"case.name: unknown case {name!r}; choose from {CASE_NAMES}")
        if v["case.envelope"] not in ("none", "cos", "exp"):
            raise ConfigError(f"case.envelope must be none, cos or exp, got {v['case.envelope']!r}")
        if v["derivatives.source"] not in ("analytic", "discrete"):
            raise ConfigError("derivatives.source must be analytic or discrete")
        if v["psi.source"] not in ("sample", "solve"):
            raise ConfigError("psi.source must be sample or solve")
        if v["psi.source"] == "solve" and v["derivatives.source"] == "analytic":
            raise ConfigError("a solved psi has no analytic derivatives; set derivatives.source = discrete")
        for key, value in v.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise ConfigError(f"{key} must be finite")
        for key in ("case.nu", "case.rho", "solver.tol", "thresholds.analytic", "thresholds.discrete_factor"):
            if not v[key] > 0:
                raise ConfigError(f"{key} must be positive, got {v[key]}")
        self.levels()
        try:
            self.grid()
            self.solve_params()
            self.case()
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    # -- builders -------------------------------------------------------------

    def grid(self, n: int | None = None) -> AxiGrid:
        v = self.values
        nr = v["grid.nr"] if n is None else n
        nz = v["grid.nz"] if n is None else n
        return build_grid(nr, nz, v["grid.rmax"], v["grid.zmin"], v["grid.zmax"])

    def solve_params(self) -> SolveParams:
        v = self.values
        return SolveParams(v["solver.tol"], v["solver.max_iter"], v["solver.initial_guess"])

    def levels(self) -> list[int]:
        try:
            levels = [int(s) for s in str(self.values["study.levels"]).split(",") if s.strip()]
        except ValueError:
            raise ConfigError("study.levels must be comma-separated integers") from None
        return levels

    def case(self) -> FlowCase:
        v = self.values
        nu, rho = v["case.nu"], v["case.rho"]
        force = GravityForce(v["case.g"]) if v["case.g"] else ZeroForce()
        builders = {
            "uniform": lambda: uniform_case(v["case.U"], nu=nu, rho=rho),
            "stagnation": lambda: stagnation_case(v["case.A"], nu=nu, rho=rho),
            "source": lambda: source_case(
                v["case.m"], v["case.z0"], nu=nu, rho=rho, exclusion=v["case.exclusion"]
            ),
            "rest": lambda: rest_case(nu=nu, rho=rho),
        }
        names = [s.strip() for s in v["case.name"].split("+")]
        case = builders[names[0]]()
        for name in names[1:]:
            case = superpose(case, builders[name](), 1.0, 1.0)
        case = case.with_force(force)
        if v["case.envelope"] == "cos":
            case = modulate_time(case, cos_envelope(v["case.omega"]))
        elif v["case.envelope"] == "exp":
            case = modulate_time(case, exp_envelope(v["case.omega"]))
        return case

    def threshold(self, key: str, discrete_scale: float | None) -> float:
        """Explicit override, else the analytic floor or ``factor * (h/L)^2 * magnitude``."""
        explicit = self.values.get(f"thresholds.{key}")
        if explicit is not None:
            return float(explicit)
        if discrete_scale is None:
            return float(self.values["thresholds.analytic"])
        return float(self.values["thresholds.discrete_factor"]) * discrete_scale

    def echo(self) -> dict:
        return dict(sorted(self.values.items()))
