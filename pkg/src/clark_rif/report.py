"""JSON and CSV output with stable formatting."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np


def jsonable(obj):
    """Convert numpy scalars/arrays, complex numbers and dataclasses to plain JSON types.

    Complex numbers become ``[re, im]``; non-finite floats become strings so
    the output stays valid JSON.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_json"):
            return jsonable(obj.to_json())
        return jsonable(dataclasses.asdict(obj))
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    write_text(path, dumps(obj))


def write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def write_csv(path, header, rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def check(name: str, lhs, rhs, tol: float, passed: bool, **extra) -> dict:
    """One identity in a report: the two sides, the tolerance and the verdict."""
    return {"name": name, "lhs": lhs, "rhs": rhs, "tol": tol, "pass": bool(passed), **extra}


def close(lhs: complex, rhs: complex, tol: float, relative_to: float | None = None) -> bool:
    scale = 1 + abs(rhs) if relative_to is None else relative_to
    return abs(complex(lhs) - complex(rhs)) <= tol * scale
