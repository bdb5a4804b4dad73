"""Reading sampled series and writing detection/simulation reports.

Two input formats: ``plain`` (one value per line, spacing supplied out
of band) and ``csv`` (``time,value`` rows, no header; the time column
must be uniformly spaced to 1e-6 relative tolerance). Reports go out as
JSON (self-contained) or CSV (tabular rows plus a ``.manifest.json``
sidecar carrying the provenance block: tool, version, UTC timestamp,
input digest, configuration echo).

JSON uses the stdlib encoder, so infinite thresholds round-trip as
``Infinity``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .detector import DetectionResult
from .evaluation import SimCell, SimReport
from .series import SampledSeries

__all__ = [
    "SeriesFormatError",
    "load_series",
    "file_sha256",
    "detection_report_dict",
    "write_detection_report",
    "load_detection_report",
    "sim_report_dict",
    "write_sim_report",
    "load_sim_report",
]

_TOOL = "peaksig"


class SeriesFormatError(ValueError):
    """Input file does not parse as the declared series format."""


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_plain(path, spacing: float, origin: float) -> SampledSeries:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise SeriesFormatError(
                    f"{path}: line {lineno}: expected one number, got {text!r}"
                ) from None
    if not values:
        raise SeriesFormatError(f"{path}: no samples found")
    return SampledSeries(np.array(values), spacing=spacing, origin=origin)


def _load_csv(path) -> SampledSeries:
    times, values = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise SeriesFormatError(
                    f"{path}: line {lineno}: expected 'time,value', got {len(row)} fields"
                )
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except ValueError:
                raise SeriesFormatError(
                    f"{path}: line {lineno}: non-numeric field in {row!r}"
                    " (headers are not supported)"
                ) from None
    if len(values) < 2:
        raise SeriesFormatError(f"{path}: need at least two rows to infer spacing")
    t = np.array(times)
    spacing = (t[-1] - t[0]) / (len(t) - 1)
    if not spacing > 0:
        raise SeriesFormatError(f"{path}: time column must be strictly increasing")
    if np.max(np.abs(np.diff(t) - spacing)) > 1e-6 * spacing:
        raise SeriesFormatError(
            f"{path}: time column is not uniformly spaced (tolerance 1e-6 relative)"
        )
    return SampledSeries(np.array(values), spacing=float(spacing), origin=float(t[0]))


def load_series(path, fmt: str = "plain", spacing: float = 1.0, origin: float = 0.0) -> SampledSeries:
    """Read a sampled series from ``path``.

    ``spacing`` and ``origin`` apply to the ``plain`` format only; the
    ``csv`` format carries its own time column.
    """
    if fmt == "plain":
        return _load_plain(path, spacing, origin)
    if fmt == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown series format {fmt!r}")


# ---------------------------------------------------------------------------
# JSON-safe conversion


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def _provenance() -> dict:
    from . import __version__

    return {
        "tool": _TOOL,
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


# ---------------------------------------------------------------------------
# Detection reports


def detection_report_dict(
    result: DetectionResult,
    input_path: str | None = None,
    input_sha256: str | None = None,
) -> dict:
    """Self-contained summary of one detection run."""
    report = _provenance()
    report["input"] = {"path": input_path, "sha256": input_sha256}
    report["config"] = _jsonable(result.config)
    report["moments"] = _jsonable(result.moments_used)
    report["decision"] = _jsonable(result.decision)
    report["boundary_excluded"] = result.boundary_excluded
    report["warnings"] = list(result.warnings)
    report["num_maxima"] = len(result.maxima)
    report["num_rejected"] = sum(1 for m in result.maxima if m.rejected)
    report["maxima"] = [_jsonable(m) for m in result.maxima]
    return report


def _write_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_rows_csv(path, header: list, rows: list, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    _write_json(manifest, str(path) + ".manifest.json")


def write_detection_report(
    result: DetectionResult,
    path,
    fmt: str = "json",
    input_path: str | None = None,
) -> None:
    """Write a detection report to ``path`` as ``json`` or ``csv``.

    The CSV variant holds one row per candidate maximum and drops the
    provenance block into ``<path>.manifest.json``.
    """
    digest = file_sha256(input_path) if input_path else None
    report = detection_report_dict(result, input_path, digest)
    if fmt == "json":
        _write_json(report, path)
        return
    if fmt == "csv":
        manifest = {k: v for k, v in report.items() if k != "maxima"}
        rows = [
            [m.index, repr(m.time), repr(m.height), repr(m.p_value), int(bool(m.rejected))]
            for m in result.maxima
        ]
        _write_rows_csv(path, ["index", "time", "height", "p_value", "rejected"], rows, manifest)
        return
    raise ValueError(f"unknown report format {fmt!r}")


def load_detection_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Simulation reports


_SIM_FIELDS = [f.name for f in dataclasses.fields(SimCell)]


def sim_report_dict(report: SimReport) -> dict:
    payload = _provenance()
    payload["seed"] = report.config.base_seed
    payload["config"] = _jsonable(report.config)
    payload["cells"] = [_jsonable(c) for c in report.cells]
    return payload


def write_sim_report(report: SimReport, path, fmt: str = "json") -> None:
    """Write a simulation report as ``json`` or ``csv`` (one row per
    (gamma, method) cell, manifest sidecar)."""
    payload = sim_report_dict(report)
    if fmt == "json":
        _write_json(payload, path)
        return
    if fmt == "csv":
        manifest = {k: v for k, v in payload.items() if k != "cells"}
        rows = [[cell[name] for name in _SIM_FIELDS] for cell in payload["cells"]]
        _write_rows_csv(path, list(_SIM_FIELDS), rows, manifest)
        return
    raise ValueError(f"unknown report format {fmt!r}")


def load_sim_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
