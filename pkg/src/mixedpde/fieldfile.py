"""Field-file and table formats: self-describing JSON grids and CSV.

Every float is printed with 17 significant digits so written files
round-trip bit-exactly; NaN (used for masked or undefined samples) is
stored as JSON null.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .grids import CARTESIAN, POLAR, GridField

SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        raise ValueError("cannot serialize infinities")
    return f"{x:.17g}"


def _emit(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_emit(v, indent + 1)}"
            for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        # flat numeric/bool arrays stay on one line
        if all(isinstance(v, (int, float, bool, np.integer, np.floating,
                              np.bool_)) or v is None for v in seq):
            return "[" + ", ".join(_emit(v) for v in seq) + "]"
        inner = ",\n".join(f"{pad}  {_emit(v, indent + 1)}" for v in seq)
        return "[\n" + inner + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_json(obj, path) -> None:
    Path(path).write_text(_emit(obj) + "\n", encoding="utf-8")


def field_to_dict(field: GridField) -> dict:
    nx, ny = field.dims
    doc = {
        "schema_version": SCHEMA_VERSION,
        "chart": field.chart,
        "origin": [field.origin[0], field.origin[1]],
        "spacing": [field.spacing[0], field.spacing[1]],
        "dims": [nx, ny],
        "components": field.components,
        "values": [None if math.isnan(v) else float(v)
                   for v in field.values.reshape(-1)],
    }
    if field.mask is not None:
        doc["mask"] = [bool(v) for v in field.mask.reshape(-1)]
    return doc


def write_field(field: GridField, path) -> None:
    emit_json(field_to_dict(field), path)


def read_field(path) -> GridField:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ValueError("field file must hold a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported schema_version {doc.get('schema_version')!r}")
    chart = doc.get("chart")
    if chart not in (CARTESIAN, POLAR):
        raise ValueError(f"unknown chart {chart!r}")
    dims = doc.get("dims")
    comps = doc.get("components")
    if (not isinstance(dims, list) or len(dims) != 2
            or not all(isinstance(d, int) for d in dims)):
        raise ValueError("dims must be two integers")
    if comps not in (1, 2):
        raise ValueError("components must be 1 or 2")
    values = doc.get("values")
    if not isinstance(values, list) or len(values) != dims[0] * dims[1] * comps:
        raise ValueError("values length must be dims[0]*dims[1]*components")
    arr = np.array([math.nan if v is None else float(v) for v in values])
    arr = arr.reshape(dims[0], dims[1], comps)
    mask = None
    if "mask" in doc:
        mvals = doc["mask"]
        if not isinstance(mvals, list) or len(mvals) != dims[0] * dims[1]:
            raise ValueError("mask length must be dims[0]*dims[1]")
        mask = np.array(mvals, dtype=bool).reshape(dims[0], dims[1])
    origin = doc.get("origin")
    spacing = doc.get("spacing")
    for name, pair in (("origin", origin), ("spacing", spacing)):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValueError(f"{name} must be two reals")
    return GridField((float(origin[0]), float(origin[1])),
                     (float(spacing[0]), float(spacing[1])),
                     arr, chart, mask)


def csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return "nan" if math.isnan(x) else f"{x:.17g}"
    return str(v)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(csv_cell(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
