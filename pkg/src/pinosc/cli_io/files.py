"""
CSV and JSON data contracts.

Trace CSV::

    # columns: time_s,<name>_<unit>[,<name>_<unit> ...]
    # t0_s: <t0>
    # dt_s: <dt>
    <time>,<value>[,<value> ...]

Numbers are written with ``%.16e`` so write -> read -> write is byte-stable.
Units are split from names at the last underscore and may not contain one.
Further ``# key: value`` comment lines are preserved as metadata.

JSON documents carry ``schema_version`` (currently 1); non-finite floats are
written as the strings ``"nan"``, ``"inf"`` and ``"-inf"``.
"""
from __future__ import annotations

import json
import math
import os
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..analysis.phase_map import PhaseMap
from ..analysis.traces import TimeTrace

__all__ = [
    "SCHEMA_VERSION",
    "CSVFormatError",
    "write_traces_csv",
    "read_traces_csv",
    "format_traces_csv",
    "parse_traces_csv",
    "write_json",
    "read_json",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_phase_map",
]

SCHEMA_VERSION = 1
_FMT = "%.16e"


class CSVFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "<text>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line
        self.source = source


def _column_name(tr: TimeTrace) -> str:
    for part, what in ((tr.name, "name"), (tr.unit, "unit")):
        if not part or any(c in part for c in ",\n\r#"):
            raise ValueError(f"trace {what} {part!r} cannot be written to a CSV header")
    if "_" in tr.unit:
        raise ValueError(f"trace unit {tr.unit!r} may not contain '_'")
    return f"{tr.name}_{tr.unit}"


def format_traces_csv(traces: Sequence[TimeTrace], metadata: Optional[Dict[str, str]] = None
                      ) -> str:
    """CSV text for traces sharing one time grid."""
    if not traces:
        raise ValueError("no traces to write")
    ref = traces[0]
    for tr in traces[1:]:
        if len(tr) != len(ref) or tr.dt != ref.dt or tr.t0 != ref.t0:
            raise ValueError("all traces in one CSV must share t0, dt and length")
    lines = ["# columns: time_s," + ",".join(_column_name(t) for t in traces),
             "# t0_s: " + _FMT % ref.t0, "# dt_s: " + _FMT % ref.dt]
    for k, v in sorted((metadata or {}).items()):
        lines.append(f"# {k}: {v}")
    data = np.column_stack([ref.times] + [t.samples for t in traces])
    body = "\n".join(",".join(_FMT % x for x in row) for row in data)
    return "\n".join(lines) + "\n" + body + "\n"


def write_traces_csv(path, traces: Sequence[TimeTrace],
                     metadata: Optional[Dict[str, str]] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_traces_csv(traces, metadata))


def parse_traces_csv(text: str, source: str = "<text>"
                     ) -> Tuple[List[TimeTrace], Dict[str, str]]:
    """Traces and extra metadata from CSV text following the trace contract."""
    lines = text.splitlines()
    if not any(l.strip() for l in lines):
        raise CSVFormatError("empty file", None, source)
    columns = None
    meta: Dict[str, str] = {}
    rows: List[List[float]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" not in body:
                continue
            key, val = (s.strip() for s in body.split(":", 1))
            if key == "columns":
                columns = [c.strip() for c in val.split(",")]
                if len(columns) < 2 or columns[0] != "time_s":
                    raise CSVFormatError("header must start with 'time_s' and name >= 1 column",
                                         lineno, source)
            else:
                meta[key] = val
            continue
        if columns is None:
            raise CSVFormatError("data before the '# columns:' header", lineno, source)
        parts = line.split(",")
        if len(parts) != len(columns):
            raise CSVFormatError(f"expected {len(columns)} fields, got {len(parts)}", lineno,
                                 source)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise CSVFormatError(f"non-numeric field in {line!r}", lineno, source) from None
    if columns is None:
        raise CSVFormatError("missing '# columns:' header", None, source)
    if len(rows) < 2:
        raise CSVFormatError("a trace needs at least 2 rows", None, source)
    data = np.array(rows)
    t = data[:, 0]
    try:
        t0 = float(meta.pop("t0_s")) if "t0_s" in meta else float(t[0])
        dt = float(meta.pop("dt_s")) if "dt_s" in meta else float(t[1] - t[0])
    except ValueError:
        raise CSVFormatError("t0_s / dt_s metadata must be numbers", None, source) from None
    if not (dt > 0):
        raise CSVFormatError("time column must increase", None, source)
    expected = t0 + dt * np.arange(t.size)
    bad = np.flatnonzero(np.abs(t - expected) > 1e-6 * dt + 1e-12 * np.abs(expected))
    if bad.size:
        raise CSVFormatError("time column is not uniformly sampled", _data_line(lines, bad[0]),
                             source)
    traces = []
    for j, col in enumerate(columns[1:], start=1):
        name, sep, unit = col.rpartition("_")
        if not sep:
            name, unit = col, "arb"
        traces.append(TimeTrace(t0, dt, data[:, j], unit, name))
    return traces, meta


def _data_line(lines: List[str], k: int) -> int:
    seen = -1
    for lineno, raw in enumerate(lines, start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            seen += 1
            if seen == k:
                return lineno
    return len(lines)


def read_traces_csv(path) -> Tuple[List[TimeTrace], Dict[str, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_traces_csv(fh.read(), os.fspath(path))


# ----------------------------------------------------------------------------
# JSON

def _encode(obj):
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_encode(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    if obj in ("nan", "inf", "-inf"):
        return float(obj)
    return obj


def dumps_json(doc: dict) -> str:
    payload = {"schema_version": SCHEMA_VERSION}
    payload.update(doc)
    return json.dumps(_encode(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(doc))


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported or missing schema_version")
    return _decode(doc)


# ----------------------------------------------------------------------------
# matrices

def write_matrix_csv(path, row_values: Sequence[float], col_values: Sequence[float],
                     matrix, row_label: str = "temperature_K", col_label: str = "voltage_V"
                     ) -> None:
    """Matrix with a header row of column coordinates and a leading coordinate column."""
    M = np.asarray(matrix, dtype=object)
    lines = [f"# rows: {row_label}; columns: {col_label}",
             row_label + "," + ",".join(_FMT % v for v in col_values)]
    for r, row in zip(row_values, M):
        cells = [(_FMT % float(x)) if not isinstance(x, str) else x for x in row]
        lines.append(_FMT % r + "," + ",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix_csv(path):
    """(row values, column values, matrix of str) from :func:`write_matrix_csv` output."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [l.strip() for l in fh if l.strip() and not l.startswith("#")]
    cols = [float(x) for x in lines[0].split(",")[1:]]
    rows, cells = [], []
    for l in lines[1:]:
        parts = l.split(",")
        rows.append(float(parts[0]))
        cells.append(parts[1:])
    return np.array(rows), np.array(cols), np.array(cells, dtype=object)


def write_phase_map(out_dir, pmap: PhaseMap, extra_summary: Optional[dict] = None) -> List[str]:
    """Strength and class matrices, per-cell metrics and summary. Returns written paths."""
    os.makedirs(out_dir, exist_ok=True)
    p_strength = os.path.join(out_dir, "strength.csv")
    p_norm = os.path.join(out_dir, "strength_normalized.csv")
    p_class = os.path.join(out_dir, "class.csv")
    p_cells = os.path.join(out_dir, "cells.json")
    p_summary = os.path.join(out_dir, "summary.json")
    write_matrix_csv(p_strength, pmap.temperatures, pmap.voltages, pmap.strength)
    write_matrix_csv(p_norm, pmap.temperatures, pmap.voltages, pmap.normalized_strength)
    write_matrix_csv(p_class, pmap.temperatures, pmap.voltages, pmap.classes)
    cells = []
    for i, T in enumerate(pmap.temperatures):
        for j, V in enumerate(pmap.voltages):
            m = pmap.metrics[i][j]
            cells.append({"V": float(V), "T": float(T),
                          "metrics": None if m is None else m.to_dict()})
    write_json(p_cells, {"kind": "phase_map_cells", "cells": cells})
    summary = pmap.summary()
    if extra_summary:
        summary.update(extra_summary)
    write_json(p_summary, {"kind": "phase_map_summary", **summary})
    return [p_strength, p_norm, p_class, p_cells, p_summary]
