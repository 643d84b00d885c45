"""Aligned-text, CSV and JSON renderers shared by the CLI subcommands.

CSV and JSON carry full precision (shortest round-trip repr of each float);
the text table uses per-column format specs.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Callable, Sequence

import numpy as np

FORMATS = ("table", "csv", "json")


def _plain(value: Any) -> Any:
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def to_json(obj: Any) -> str:
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def _csv_cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def to_csv(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow(_csv_cell(v) for v in row)
    return buf.getvalue()


def to_table(
    headers: Sequence[str],
    rows: Sequence[Sequence[Any]],
    formats: Sequence[str | Callable[[Any], str] | None] | None = None,
) -> str:
    formats = formats or [None] * len(headers)

    def cell(value, fmt):
        if value is None:
            return ""
        if callable(fmt):
            return fmt(value)
        if fmt:
            return format(value, fmt)
        return str(value)

    body = [[cell(v, f) for v, f in zip(row, formats)] for row in rows]
    widths = [max([len(h)] + [len(r[i]) for r in body]) for i, h in enumerate(headers)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in body]
    return "\n".join(lines) + "\n"
