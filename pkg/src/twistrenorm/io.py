"""JSON and CSV artifacts.

JSON floats are written with ``repr``, which round-trips doubles exactly
(17 significant digits at most).
"""
from __future__ import annotations

import csv
import json
import os

from .errors import InputError, MalformedInput
from .renorm import GeneratingSystem

FIXED_POINT_FORMAT = "twistrenorm.fixed_point/1"


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=False)
        fh.write("\n")


def read_json(path):
    if not os.path.exists(path):
        raise InputError("input file not found", path=str(path))
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def read_csv(path):
    if not os.path.exists(path):
        raise InputError("input file not found", path=str(path))
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def fixed_point_to_dict(gen, report=None, path=None):
    out = {"format": FIXED_POINT_FORMAT, **gen.to_dict()}
    out["report"] = None if report is None else report.to_dict()
    if path is not None:
        out["path"] = [{"degree": r.degree, "lambda": r.lam, "mu": r.mu,
                        "residual_norm": r.residual_norm, "newton_steps": r.newton_steps}
                       for _, r in path]
    return out


def save_fixed_point(filename, gen, report=None, path=None):
    write_json(filename, fixed_point_to_dict(gen, report, path))


def load_fixed_point(filename):
    """``(GeneratingSystem, report dict or None)`` from a fixed-point file."""
    data = read_json(filename)
    try:
        gen = GeneratingSystem.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"not a fixed-point file: {exc}", path=str(filename)) from exc
    return gen, data.get("report")
