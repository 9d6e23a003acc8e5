"""Shift tables, reports and diameter matrices on disk.

Every file starts with ``# key=value`` provenance lines (the run fingerprint
first); floats are written with ``repr`` so a table reads back bit-exact.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Mapping, Sequence

from pydantic import ValidationError

from potential_identification.errors import ConfigurationError
from potential_identification.forward_solver import PhaseShiftSet
from potential_identification.global_search import StabilityReport

logger = logging.getLogger(__name__)


def _header_lines(header: Mapping[str, Any]) -> list[str]:
    return [f"# {key}={value}\n" for key, value in header.items()]


def write_shift_csv(path: str | Path, shifts: PhaseShiftSet, header: Mapping[str, Any]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    meta = {**header, "k": repr(shifts.k), "cutoff": shifts.cutoff}
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.writelines(_header_lines(meta))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["l", "delta"])
        for order, delta in enumerate(shifts.shifts):
            writer.writerow([order, repr(delta)])
    logger.info("wrote %d shifts to %s", len(shifts.shifts), target)
    return target


def write_shift_json(path: str | Path, shifts: PhaseShiftSet, header: Mapping[str, Any]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    payload = {"fingerprint": dict(header), **shifts.model_dump(mode="json")}
    target.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %d shifts to %s", len(shifts.shifts), target)
    return target


def write_shifts(path: str | Path, shifts: PhaseShiftSet, header: Mapping[str, Any]) -> Path:
    if Path(path).suffix == ".json":
        return write_shift_json(path, shifts, header)
    return write_shift_csv(path, shifts, header)


def _read_csv(source: Path) -> tuple[dict[str, str], list[float]]:
    meta: dict[str, str] = {}
    rows: list[str] = []
    with source.open("r", encoding="utf-8") as handle:
        for line in handle:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
            elif line.strip():
                rows.append(line)
    reader = csv.DictReader(rows)
    if reader.fieldnames != ["l", "delta"]:
        raise ConfigurationError(f"{source}: expected header 'l,delta', got {reader.fieldnames}")
    shifts: list[float] = []
    for expected, row in enumerate(reader):
        if int(row["l"]) != expected:
            raise ConfigurationError(f"{source}: orders must run 0, 1, 2, ...; found l={row['l']} at row {expected}")
        shifts.append(float(row["delta"]))
    return meta, shifts


def read_shifts(path: str | Path, k: float | None = None) -> PhaseShiftSet:
    """Load a shift table written by :func:`write_shifts`; ``k`` overrides a missing header."""
    source = Path(path)
    try:
        if source.suffix == ".json":
            payload = json.loads(source.read_text(encoding="utf-8"))
            shifts = payload["shifts"]
            k_value = payload.get("k", k)
        else:
            meta, shifts = _read_csv(source)
            k_value = float(meta["k"]) if "k" in meta else k
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise ConfigurationError(f"malformed shift file {source}: {exc}") from exc
    if k_value is None:
        raise ConfigurationError(f"{source} records no wave number; pass k explicitly")
    if not shifts:
        raise ConfigurationError(f"{source} holds no shifts")
    try:
        return PhaseShiftSet(k=k_value, shifts=tuple(shifts), cutoff=len(shifts) - 1)
    except ValidationError as exc:
        raise ConfigurationError(f"malformed shift file {source}: {exc}") from exc


def render_summary(report: StabilityReport, header: Mapping[str, Any]) -> str:
    lines = [f"{key}: {value}" for key, value in header.items()]
    lines.append(f"verdict: {report.verdict}")
    lines.append(f"best phi: {report.best.phi:.6e}")
    if report.planted_phi is not None:
        lines.append(f"planted phi: {report.planted_phi:.6e}")
    lines.append("best potential:")
    lines.append(f"  {'r_i':>10}  {'q_i':>12}")
    for radius, value in zip(report.best.potential.radii, report.best.potential.values):
        lines.append(f"  {radius:>10.6f}  {value:>12.6f}")
    lines.append("diameter history:")
    for record in report.iterations:
        lines.append(f"  j={record.iteration}  D={record.diameter:.6e}  d_av={record.minimizing_set.d_av:.6e}")
    return "\n".join(lines) + "\n"


def write_report(path: str | Path, report: StabilityReport, header: Mapping[str, Any]) -> tuple[Path, Path]:
    """JSON report plus a plain-text summary next to it."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    body = json.loads(report.model_dump_json())
    payload = {"fingerprint": dict(header), "report": body}
    target.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    summary = target.with_suffix(".txt")
    summary.write_text(render_summary(report, header), encoding="utf-8")
    logger.info("wrote report %s and summary %s", target, summary)
    return target, summary


def read_report(path: str | Path) -> StabilityReport:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return StabilityReport.model_validate(payload["report"])


def write_matrix_csv(
    path: str | Path,
    k_list: Sequence[float],
    h_list: Sequence[float],
    matrix: Sequence[Sequence[float]],
    header: Mapping[str, Any],
) -> Path:
    """Rows per k, columns per h, in the layout of a diameter table."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.writelines(_header_lines(header))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["k", *(f"h={h!r}" for h in h_list)])
        for k, row in zip(k_list, matrix):
            writer.writerow([repr(k), *(repr(value) if math.isfinite(value) else str(value) for value in row)])
    logger.info("wrote %dx%d diameter matrix to %s", len(k_list), len(h_list), target)
    return target


def read_matrix_csv(path: str | Path) -> tuple[list[float], list[float], list[list[float]]]:
    with Path(path).open("r", encoding="utf-8") as handle:
        rows = list(csv.reader(line for line in handle if not line.startswith("#")))
    h_list = [float(cell.partition("=")[2]) for cell in rows[0][1:]]
    k_list = [float(row[0]) for row in rows[1:]]
    matrix = [[float(cell) for cell in row[1:]] for row in rows[1:]]
    return k_list, h_list, matrix


def write_history_csv(
    path: str | Path,
    rows: Sequence[tuple[float, float, Sequence[float]]],
    header: Mapping[str, Any],
) -> Path:
    """One row per (k, h) run with its diameters D^1, D^2, ...; short runs leave trailing cells empty."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    width = max((len(diameters) for _, _, diameters in rows), default=0)
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.writelines(_header_lines(header))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["k", "h", *(f"D{j}" for j in range(1, width + 1))])
        for k, h, diameters in rows:
            cells = [repr(d) if math.isfinite(d) else str(d) for d in diameters]
            writer.writerow([repr(k), repr(h), *cells, *([""] * (width - len(cells)))])
    logger.info("wrote %d diameter histories to %s", len(rows), target)
    return target


def read_history_csv(path: str | Path) -> list[tuple[float, float, list[float]]]:
    with Path(path).open("r", encoding="utf-8") as handle:
        rows = list(csv.reader(line for line in handle if not line.startswith("#")))
    return [(float(row[0]), float(row[1]), [float(cell) for cell in row[2:] if cell]) for row in rows[1:]]
