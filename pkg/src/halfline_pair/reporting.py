"""Deterministic JSON and CSV output.

Floats are written with 17 significant digits so that identical runs give
byte-identical files; infinities and NaN become the strings ``"inf"``,
``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def to_json_text(obj, indent: int = 2) -> str:
    """Serialise dicts, lists, scalars and numpy values; keys keep insertion order."""
    pad = " " * indent

    def emit(value, level: int) -> str:
        if isinstance(value, (bool, np.bool_)):
            return "true" if value else "false"
        if value is None:
            return "null"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return _format_float(float(value))
        if isinstance(value, str):
            return json.dumps(value, ensure_ascii=False)
        if isinstance(value, np.ndarray):
            value = value.tolist()
        if isinstance(value, dict):
            if not value:
                return "{}"
            inner = pad * (level + 1)
            items = [f"{inner}{json.dumps(str(k))}: {emit(v, level + 1)}" for k, v in value.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad * level + "}"
        if isinstance(value, (list, tuple)):
            if not value:
                return "[]"
            if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in value):
                return "[" + ", ".join(emit(v, level) for v in value) + "]"
            inner = pad * (level + 1)
            return "[\n" + ",\n".join(inner + emit(v, level + 1) for v in value) + "\n" + pad * level + "]"
        if hasattr(value, "to_json"):
            return emit(value.to_json(), level)
        raise TypeError(f"cannot serialise {type(value).__name__}")

    return emit(obj, 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json_text(obj))
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_columns(path, header, *columns) -> Path:
    """Two (or more) column data file from equally long arrays."""
    return write_csv(path, header, zip(*columns))
