"""CSV / JSON serialization shared by the command-line subcommands.

Both formats carry the same field names in the same order.  Floats are
written with ``repr`` (shortest round-trip), run metadata goes to a single
``# meta:`` comment line in CSV and to the ``meta`` object in JSON, and nothing
time-dependent is ever written, so identical input gives identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Mapping, Sequence

from . import __version__

__all__ = ["flatten", "format_value", "to_csv", "to_json", "from_csv", "make_meta"]


def format_value(v) -> str:
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):  # numpy scalars
        v = v.item()
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):  # numpy scalars
        return _jsonable(v.item())
    return v


def make_meta(command: str, params: Mapping, grid: Mapping | None = None, **extra) -> dict:
    meta = {"command": command, "version": __version__, "params": dict(params),
            "grid": dict(grid or {})}
    meta.update(extra)
    return meta


def flatten(row: Mapping, prefix: str = "") -> dict:
    """Nested dicts become dotted keys, ``{"a": {"b": 1}} -> {"a.b": 1}``."""
    out = {}
    for k, v in row.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _fields(rows: Sequence[Mapping]) -> list[str]:
    fields: list[str] = []
    for row in rows:
        for k in row:
            if k not in fields:
                fields.append(k)
    return fields


def to_csv(rows: Sequence[Mapping], meta: Mapping | None = None) -> str:
    buf = io.StringIO()
    if meta is not None:
        buf.write("# meta: " + json.dumps(_jsonable(meta), sort_keys=True) + "\n")
    rows = [flatten(r) for r in rows]
    fields = _fields(rows)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([format_value(row.get(k)) for k in fields])
    return buf.getvalue()


def to_json(rows: Iterable[Mapping], meta: Mapping, **sections) -> str:
    doc = {"meta": _jsonable(meta), "rows": [_jsonable(dict(r)) for r in rows]}
    for k, v in sections.items():
        doc[k] = _jsonable(v)
    return json.dumps(doc, indent=2) + "\n"


def _parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def from_csv(text: str) -> tuple[dict | None, list[dict]]:
    """Inverse of :func:`to_csv` (values re-typed as bool/int/float/str)."""
    lines = text.splitlines()
    meta = None
    if lines and lines[0].startswith("# meta: "):
        meta = json.loads(lines[0][len("# meta: "):])
        lines = lines[1:]
    reader = csv.reader(lines)
    header = next(reader, [])
    rows = [{k: _parse_cell(v) for k, v in zip(header, rec)} for rec in reader]
    return meta, rows
