"""Result serialization: JSON verdicts, CSV tables, flat binary fields.

All writers are single-writer and deterministic: given identical inputs they
produce byte-identical files (sorted JSON keys, fixed float formatting, no
timestamps).  Every artifact embeds the provenance stamp (config hash, seed,
library version) passed by the caller.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .detector import VERDICT_NAMES, DecayReport, ScanResult

__all__ = [
    "jsonable",
    "write_json",
    "write_field",
    "read_field",
    "decay_report_dict",
    "write_decay_csv",
    "write_scan_csv",
    "write_gnuplot_matrix",
    "scan_summary",
]

_FLOAT_FMT = "%.17g"


def jsonable(value):
    """Recursively convert numpy scalars/arrays and complex numbers for JSON."""
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def write_json(path: str, payload: dict) -> None:
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2)
    with open(path, "w") as fh:
        fh.write(text + "\n")


def write_field(path: str, values: np.ndarray, meta: dict) -> None:
    """Flat little-endian binary plus a JSON sidecar header at ``path + '.json'``.

    ``values`` is written in C order; the sidecar records dtype, shape and the
    caller's metadata (grid origin and spacing, provenance stamp).
    """
    values = np.asarray(values)
    dtype = "<c16" if np.iscomplexobj(values) else "<f8"
    data = np.ascontiguousarray(values.astype(dtype))
    with open(path, "wb") as fh:
        fh.write(data.tobytes())
    header = {"dtype": dtype, "shape": list(values.shape), "order": "C"}
    header.update(meta)
    write_json(path + ".json", header)


def read_field(path: str):
    """Read a field written by ``write_field``; returns (array, header)."""
    with open(path + ".json") as fh:
        header = json.load(fh)
    data = np.fromfile(path, dtype=np.dtype(header["dtype"]))
    return data.reshape(header["shape"]), header


def _stamp_lines(stamp: dict):
    return [f"# {key}={stamp[key]}" for key in sorted(stamp)]


def decay_report_dict(report: DecayReport) -> dict:
    """JSON-ready form of a single decay report."""
    return {
        "point": report.point,
        "direction": report.direction,
        "verdict": report.verdict,
        "fitted_slope": report.fitted_slope,
        "residual": report.residual,
        "floor": report.floor,
        "floor_hit": report.floor_hit,
        "samples": [[a, b] for a, b in report.samples],
        "warnings": list(report.warnings),
    }


def write_decay_csv(path: str, reports, stamp: dict) -> None:
    if not reports:
        raise ValueError("no decay reports to write")
    d = len(np.asarray(reports[0].point))
    cols = (
        [f"x{i}" for i in range(d)]
        + [f"xi{i}" for i in range(d)]
        + ["verdict", "slope", "residual", "floor", "floor_hit", "n_rungs"]
    )
    lines = _stamp_lines(stamp) + [",".join(cols)]
    for rep in reports:
        nums = list(np.asarray(rep.point)) + list(np.asarray(rep.direction))
        row = [_FLOAT_FMT % v for v in nums]
        row.append(rep.verdict)
        row.append("" if rep.fitted_slope is None else _FLOAT_FMT % rep.fitted_slope)
        row.append("" if rep.residual is None else _FLOAT_FMT % rep.residual)
        row.append(_FLOAT_FMT % rep.floor)
        row.append(str(int(rep.floor_hit)))
        row.append(str(len(rep.samples)))
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_scan_csv(path: str, scan: ScanResult, stamp: dict) -> None:
    """One row per (cell, direction): indices, coordinates, verdict, fit."""
    d = len(scan.axes)
    cols = (
        [f"i{k}" for k in range(d)]
        + [f"x{k}" for k in range(d)]
        + ["dir"]
        + [f"xi{k}" for k in range(d)]
        + ["verdict", "slope", "residual"]
    )
    lines = _stamp_lines(stamp) + [",".join(cols)]
    grid_shape = scan.verdicts.shape[:-1]
    n_dirs = scan.verdicts.shape[-1]
    for idx in np.ndindex(grid_shape):
        coords = [scan.axes[k][idx[k]] for k in range(d)]
        for j in range(n_dirs):
            row = [str(i) for i in idx]
            row += [_FLOAT_FMT % c for c in coords]
            row.append(str(j))
            row += [_FLOAT_FMT % c for c in scan.directions[j]]
            row.append(VERDICT_NAMES[int(scan.verdicts[idx + (j,)])])
            row.append(_FLOAT_FMT % scan.slopes[idx + (j,)])
            row.append(_FLOAT_FMT % scan.residuals[idx + (j,)])
            lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_gnuplot_matrix(path: str, scan: ScanResult, stamp: dict) -> None:
    """Verdict-code matrices, one blank-line-separated block per direction.

    Plot with gnuplot's nonuniform matrix mode, e.g.
    ``plot 'scan.mat' index 0 matrix with image``.
    """
    if len(scan.axes) != 2:
        raise ValueError("gnuplot matrix export covers 2-d scans only")
    lines = _stamp_lines(stamp)
    legend = ", ".join(f"{code}={name}" for code, name in sorted(VERDICT_NAMES.items()))
    lines.append(f"# codes: {legend}")
    for j in range(scan.verdicts.shape[-1]):
        dx, dy = scan.directions[j]
        lines.append(f"# direction {j}: ({_FLOAT_FMT % dx}, {_FLOAT_FMT % dy})")
        block = scan.verdicts[:, :, j]
        for row in block:
            lines.append(" ".join(str(int(v)) for v in row))
        lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def scan_summary(scan: ScanResult, stamp: dict) -> dict:
    """JSON-ready verdict counts and warnings for a scan."""
    return {
        "counts": scan.counts(),
        "grid_shape": list(scan.verdicts.shape[:-1]),
        "n_directions": int(scan.verdicts.shape[-1]),
        "warnings": list(scan.warnings),
        "stamp": stamp,
    }
