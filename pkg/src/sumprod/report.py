"""JSON and CSV serialization for reports and traces."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

CSV_FIELDS = ["instance", "theorem_id", "step", "kind", "lhs", "rhs", "ratio", "holds", "note"]


def jsonable(obj):
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else float(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return str(obj)
        return obj
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return str(obj)


def dumps(obj, indent=2) -> str:
    return json.dumps(jsonable(obj), indent=indent)


def ratio(lhs, rhs):
    """lhs / rhs as a float, exact for big integers; None when rhs == 0."""
    if rhs == 0:
        return None
    if isinstance(lhs, float) or isinstance(rhs, float):
        return float(lhs) / float(rhs)
    return float(Fraction(lhs) / Fraction(rhs))


def csv_rows(instance: str, payload: dict) -> list:
    """One row per inequality step of a report or trace JSON payload."""
    theorem = payload.get("theorem_id", "")
    steps = payload.get("steps")
    if steps is None:
        steps = [
            {
                "name": theorem,
                "kind": "asymptotic",
                "lhs": payload.get("lhs"),
                "rhs": payload.get("rhs"),
                "ratio": payload.get("ratio"),
                "holds": None,
                "note": "",
            }
        ]
    rows = []
    for s in steps:
        rows.append(
            {
                "instance": instance,
                "theorem_id": theorem,
                "step": s.get("name"),
                "kind": s.get("kind"),
                "lhs": s.get("lhs"),
                "rhs": s.get("rhs"),
                "ratio": s.get("ratio"),
                "holds": s.get("holds"),
                "note": s.get("note", ""),
            }
        )
    return rows


def to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
