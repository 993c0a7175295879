"""CSV and JSON emission with a byte-for-byte determinism contract."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

FIELD_COLUMNS = ("r", "z", "psi", "u", "w", "p", "phi", "eq6_r", "eq7_z", "eq11_correct", "eq11_erroneous")


class ReportError(RuntimeError):
    pass


@dataclass(frozen=True)
class Norm:
    linf: float
    rms: float


@dataclass
class ResidualReport:
    command: str
    entries: dict[str, Norm]
    thresholds: dict[str, float]
    grid: dict
    provenance: dict
    config: dict
    solver: dict | None = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> dict[str, bool]:
        return {k: self.entries[k].linf <= t for k, t in self.thresholds.items()}

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "entries": {k: asdict(v) for k, v in self.entries.items()},
            "thresholds": self.thresholds,
            "passed": self.passed,
            "all_passed": all(self.passed.values()),
            "grid": self.grid,
            "provenance": self.provenance,
            "config": self.config,
            "solver": self.solver,
            **self.extra,
        }


def _check_finite(obj, path="report") -> None:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ReportError(f"non-finite value at {path}; refusing to write")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


def dumps_json(payload: dict) -> str:
    _check_finite(payload)
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def fmt(x: float) -> str:
    # + 0.0 folds -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def field_rows(grid, valid: np.ndarray, columns: dict[str, tuple[np.ndarray, np.ndarray]]):
    """One row per valid node, j-major then i; cells outside a column's mask stay empty."""
    R, Z = grid.mesh()
    for j in range(grid.nz):
        for i in range(grid.nr):
            if not valid[i, j]:
                continue
            row = [fmt(R[i, j]), fmt(Z[i, j])]
            for name in FIELD_COLUMNS[2:]:
                values, mask = columns[name]
                row.append(fmt(values[i, j]) if mask[i, j] else "")
            yield row


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc


def emit_report(report: ResidualReport, field_csv: str | None, out_dir: Path, stem: str = "verify") -> list[Path]:
    """Write ``<stem>.json`` and, when given, ``<stem>_fields.csv``; validates before writing."""
    text = dumps_json(report.to_dict())
    paths = []
    if field_csv is not None:
        p = out_dir / f"{stem}_fields.csv"
        _write(p, field_csv)
        paths.append(p)
    p = out_dir / f"{stem}.json"
    _write(p, text)
    paths.append(p)
    return paths


def emit_table(header, rows, summary: dict, out_dir: Path, stem: str) -> list[Path]:
    text = dumps_json(summary)
    csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
    _write(csv_path, render_csv(header, rows))
    _write(json_path, text)
    return [csv_path, json_path]
