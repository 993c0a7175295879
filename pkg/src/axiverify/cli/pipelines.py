"""The verify, falsify and convergence pipelines behind the CLI commands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from axiverify.cli.config import THRESHOLD_KEYS, RunConfig
from axiverify.cli.report import (
    FIELD_COLUMNS,
    Norm,
    ResidualReport,
    field_rows,
    fmt,
    render_csv,
)
from axiverify.colehopf import phi_equation_residual, psi_to_phi, uw_transform_identity_gap
from axiverify.grid import AxiGrid, NodeMask, ScalarField, field_norms, sample_case
from axiverify.physics import (
    StateSnapshot,
    bernoulli_consistency,
    continuity_residual,
    momentum_residuals,
    pressure_from_bernoulli,
    snapshot_from_case,
    snapshot_from_fields,
    sum_uw,
    velocity_from_potential,
    vorticity,
)
from axiverify.solver import boundary_from_case, convergence_study, solve_laplace_dirichlet

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


@dataclass
class Evaluation:
    """All residual fields of one snapshot, with the mask each is valid on."""

    snapshot: StateSnapshot
    u: ScalarField
    w: ScalarField
    p: ScalarField
    phi: ScalarField
    fields: dict[str, tuple[ScalarField, NodeMask]]
    F_supdev: float
    C_estimate: float


def evaluate(s: StateSnapshot) -> Evaluation:
    v = velocity_from_potential(s)
    p = pressure_from_bernoulli(s)
    mom = momentum_residuals(s, p)
    _, stats, _ = bernoulli_consistency(s, p)
    phi = psi_to_phi(s.psi, s.nu, s.mask)
    fields = {
        "eq6_r": (mom.res_r, mom.mask_r),
        "eq7_z": (mom.res_z, mom.mask_z),
        "continuity": continuity_residual(s),
        "curl": vorticity(s),
        "eq11_correct": (phi_equation_residual(s, p, "correct"), s.mask),
        "eq11_erroneous": (phi_equation_residual(s, p, "erroneous"), s.mask),
        "uw_identity_gap": (uw_transform_identity_gap(v, phi, s), s.mask),
        "sup_uw": (sum_uw(v), s.mask),
    }
    return Evaluation(s, v.u, v.w, p, phi.phi, fields, stats.spatial_sup_dev, stats.C_estimate)


def norms(ev: Evaluation) -> dict[str, Norm]:
    empty = [k for k, (_, m) in ev.fields.items() if m.count == 0]
    if empty:
        raise ValueError(f"grid too coarse: no valid nodes left for {', '.join(empty)}")
    out = {k: Norm(*field_norms(f, m)) for k, (f, m) in ev.fields.items()}
    out["eq10_F_supdev"] = Norm(ev.F_supdev, ev.F_supdev)
    return dict(sorted(out.items()))


def magnitude(ev: Evaluation) -> float:
    """Field scale that discrete thresholds are measured against."""
    valid = ev.snapshot.mask.valid
    vals = [np.abs(a[valid]).max() for a in (ev.snapshot.psi.values, ev.u.values, ev.w.values)]
    vals.append(np.abs(ev.p.values[valid]).max() / ev.snapshot.rho)
    return max(1.0, *map(float, vals))


def thresholds(cfg: RunConfig, ev: Evaluation) -> dict[str, float]:
    s = ev.snapshot
    if s.source == "analytic":
        return {k: cfg.threshold(k, None) for k in THRESHOLD_KEYS}
    g = s.grid
    rel_h2 = (g.h / max(g.rmax, g.zmax - g.zmin)) ** 2
    M = magnitude(ev)
    phi_scale = max(1.0, float(ev.phi.values[s.mask.valid].max()) / (2.0 * s.nu))
    out = {k: cfg.threshold(k, rel_h2 * M) for k in THRESHOLD_KEYS}
    out["eq11_correct"] = cfg.threshold("eq11_correct", rel_h2 * M * phi_scale)
    return out


def fields_csv(ev: Evaluation) -> str:
    s = ev.snapshot
    valid = s.mask.valid
    columns = {
        "psi": (s.psi.values, valid),
        "u": (ev.u.values, valid),
        "w": (ev.w.values, valid),
        "p": (ev.p.values, valid),
        "phi": (ev.phi.values, valid),
    }
    for k in ("eq6_r", "eq7_z", "eq11_correct", "eq11_erroneous"):
        f, m = ev.fields[k]
        columns[k] = (f.values, m.valid)
    return render_csv(FIELD_COLUMNS, field_rows(s.grid, valid, columns))


@dataclass
class VerifyResult:
    report: ResidualReport
    csv: str
    exit_code: int


def run_verify(cfg: RunConfig) -> VerifyResult:
    case = cfg.case()
    grid = cfg.grid()
    t = cfg["time.t"]
    solver_info = None
    converged = True
    if cfg["psi.source"] == "solve":
        sample = sample_case(case, grid, t)
        if sample.mask.count != grid.nr * grid.nz:
            raise ValueError("psi.source = solve needs a domain free of exclusion zones")
        out = solve_laplace_dirichlet(grid, boundary_from_case(case, grid, t), cfg.solve_params())
        converged = out.converged
        solver_info = {
            "converged": out.converged,
            "iterations": out.iterations,
            "relative_residual": out.residual,
            "scale": out.scale,
            "sup_error_vs_analytic": field_norms(out.field - sample.psi)[0],
        }
        snap = snapshot_from_fields(
            out.field,
            ScalarField(grid, sample.psi_t.values),
            ScalarField(grid, sample.T.values),
            case.nu,
            case.rho,
            sample.mask,
            t,
        )
    else:
        snap = snapshot_from_case(case, grid, t, cfg["derivatives.source"])

    ev = evaluate(snap)
    report = ResidualReport(
        command="verify",
        entries=norms(ev),
        thresholds=thresholds(cfg, ev),
        grid=grid.describe(),
        provenance={
            "derivative_source": snap.source,
            "psi_source": cfg["psi.source"],
            "case": case.name,
            "masked_nodes": int(grid.nr * grid.nz - snap.mask.count),
        },
        config=cfg.echo(),
        solver=solver_info,
        extra={"C_estimate": ev.C_estimate},
    )
    if not converged:
        code = EXIT_SOLVER
    elif all(report.passed.values()):
        code = EXIT_OK
    else:
        code = EXIT_FAIL
    return VerifyResult(report, fields_csv(ev), code)


# -- falsification --------------------------------------------------------------

FALSIFY_HEADER = (
    "nr", "nz", "h",
    "eq11_correct_linf", "eq11_correct_rms", "eq11_erroneous_linf", "eq11_erroneous_rms",
    "correct_ratio", "erroneous_change", "sup_uw", "uw_gap_linf",
)


def _levels(cfg: RunConfig, minimum: int) -> list[AxiGrid]:
    levels = cfg.levels()
    if len(levels) < minimum:
        raise ValueError(f"study.levels needs at least {minimum} grid levels, got {levels}")
    grids = [cfg.grid(n) for n in levels]
    for coarse, fine in zip(grids, grids[1:]):
        if not fine.refines(coarse):
            raise ValueError(f"grid level {fine.nr} does not refine {coarse.nr} by a factor of 2")
    return grids


def run_falsify(cfg: RunConfig):
    """Correct vs erroneous phi-equation residuals under grid refinement.

    Returns ``(header, rows, summary, exit_code)``.
    """
    case = cfg.case()
    t = cfg["time.t"]
    grids = _levels(cfg, 3)
    table = []
    prev = None
    indistinguishable = True
    for g in grids:
        s = snapshot_from_case(case, g, t, "discrete")
        ev = evaluate(s)
        nm = norms(ev)
        corr, err = nm["eq11_correct"], nm["eq11_erroneous"]
        diff = np.abs(ev.fields["eq11_erroneous"][0].values - ev.fields["eq11_correct"][0].values)
        scale = max(1.0, err.linf, corr.linf)
        indistinguishable &= bool(np.max(diff[s.mask.valid]) <= 1e-12 * scale)
        ratio = prev[0] / corr.linf if prev and corr.linf > 0 else None
        change = abs(err.linf - prev[1]) / prev[1] if prev and prev[1] > 0 else None
        table.append({
            "nr": g.nr, "nz": g.nz, "h": g.h,
            "eq11_correct_linf": corr.linf, "eq11_correct_rms": corr.rms,
            "eq11_erroneous_linf": err.linf, "eq11_erroneous_rms": err.rms,
            "correct_ratio": ratio, "erroneous_change": change,
            "sup_uw": nm["sup_uw"].linf, "uw_gap_linf": nm["uw_identity_gap"].linf,
        })
        prev = (corr.linf, err.linf)

    fine = grids[-1]
    ev_a = evaluate(snapshot_from_case(case, fine, t, "analytic"))
    nm_a = norms(ev_a)
    analytic = {
        "eq11_correct_linf": nm_a["eq11_correct"].linf,
        "eq11_erroneous_linf": nm_a["eq11_erroneous"].linf,
        "sup_uw": nm_a["sup_uw"].linf,
        "uw_gap_linf": nm_a["uw_identity_gap"].linf,
    }

    last, before = table[-1], table[-2]
    correct_converges = (
        last["eq11_correct_linf"] <= 10.0 * cfg["thresholds.analytic"]
        or (last["correct_ratio"] is not None and last["correct_ratio"] >= 2.0 ** 1.5)
    )
    erroneous_stable = last["erroneous_change"] is not None and last["erroneous_change"] < 0.05
    bounded_away = last["eq11_erroneous_linf"] >= 10.0 * last["eq11_correct_linf"]
    if indistinguishable:
        verdict = "indistinguishable"
    elif erroneous_stable and bounded_away and correct_converges:
        verdict = "falsified"
    else:
        verdict = "inconclusive"
    code = EXIT_OK if correct_converges and verdict != "inconclusive" else EXIT_FAIL
    summary = {
        "command": "falsify",
        "case": case.name,
        "levels": table,
        "analytic_finest": analytic,
        "verdict": verdict,
        "correct_converges": bool(correct_converges),
        "erroneous_stable": bool(erroneous_stable),
        "config": cfg.echo(),
    }
    rows = [[_cell(r[k]) for k in FALSIFY_HEADER] for r in table]
    return FALSIFY_HEADER, rows, summary, code


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return fmt(x)


# -- convergence ------------------------------------------------------------------

CONVERGENCE_HEADER = ("nr", "nz", "h", "sup_error", "order", "iterations")


def run_convergence(cfg: RunConfig):
    case = cfg.case()
    grids = _levels(cfg, 2)
    domain = (cfg["grid.rmax"], cfg["grid.zmin"], cfg["grid.zmax"])
    result = convergence_study(case, domain, [g.shape for g in grids], cfg["time.t"], cfg.solve_params())
    rows, table = [], []
    for row in result:
        if row.below_floor:
            order = "floor"
        elif row.observed_order is None:
            order = ""
        else:
            order = fmt(row.observed_order)
        rows.append([str(row.nr), str(row.nz), fmt(row.h), fmt(row.sup_error), order, str(row.iterations)])
        table.append({
            "nr": row.nr, "nz": row.nz, "h": row.h, "sup_error": row.sup_error,
            "order": row.observed_order if not row.below_floor else "floor",
            "iterations": row.iterations,
        })
    summary = {"command": "convergence", "case": case.name, "levels": table, "config": cfg.echo()}
    return CONVERGENCE_HEADER, rows, summary, EXIT_OK

