"""Point-set files and report writers.

Point sets are JSON objects ``{"d": d, "points": [[[re, im], ...d], ...n]}``;
when d = 1 a point may also be written as a bare ``[re, im]``.
Pick targets use the same layout under the keys ``"m"`` and ``"targets"``.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ball import PointSet
from .errors import ParseError, RKDistError


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _is_pair(c):
    return (
        isinstance(c, list)
        and len(c) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in c)
    )


def _complex_rows(rows, width, key):
    if not isinstance(rows, list) or not rows:
        raise ParseError(f'"{key}" must be a non-empty list')
    out = np.empty((len(rows), width), dtype=complex)
    for i, row in enumerate(rows):
        if width == 1 and _is_pair(row):
            row = [row]  # one-coordinate shorthand: [re, im] instead of [[re, im]]
        if not isinstance(row, list) or len(row) != width:
            raise ParseError(f'"{key}" entry must hold {width} coordinates', index=i)
        for j, c in enumerate(row):
            if not _is_pair(c):
                raise ParseError(f"coordinate {j} must be a [re, im] pair of numbers", index=i)
            out[i, j] = complex(c[0], c[1])
    return out


def _width(data, key):
    if not isinstance(data, dict) or key not in data:
        raise ParseError(f'expected a JSON object with key "{key}"')
    w = data[key]
    if not isinstance(w, int) or isinstance(w, bool) or w < 1:
        raise ParseError(f'"{key}" must be a positive integer')
    return w


def pointset_from_dict(data):
    d = _width(data, "d")
    return PointSet(_complex_rows(data.get("points"), d, "points"))


def load_pointset(path):
    return pointset_from_dict(_read_json(path))


def load_targets(path):
    data = _read_json(path)
    m = _width(data, "m")
    return _complex_rows(data.get("targets"), m, "targets")


def pointset_to_dict(X):
    return {
        "d": X.dim,
        "points": [[[float(c.real), float(c.imag)] for c in p] for p in X.points],
    }


def save_pointset(X, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pointset_to_dict(X), fh)


# --- report rows -----------------------------------------------------------


@dataclass
class ResultRow:
    experiment: str
    inputs: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)

    def add(self, name, value, certificate):
        integral = isinstance(value, (int, np.integer)) and not isinstance(value, bool)
        value = int(value) if integral else float(value)
        if not math.isfinite(value):
            raise RKDistError(f"metric {name} is not finite")
        self.metrics[name] = value
        self.certificates[name] = str(getattr(certificate, "value", certificate))

    def sort_key(self):
        return (self.experiment, sorted((k, _scalar_key(v)) for k, v in self.inputs.items()))

    def as_dict(self):
        return {
            "experiment": self.experiment,
            "params": self.inputs,
            "metrics": self.metrics,
            "certificates": self.certificates,
        }


def _scalar_key(v):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return (0, float(v), "")
    return (1, 0.0, str(v))


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return json.dumps(v)
    return str(v)


def rows_to_csv(rows):
    rows = sorted(rows, key=ResultRow.sort_key)
    params = sorted({k for r in rows for k in r.inputs})
    metrics = sorted({k for r in rows for k in r.metrics})
    header = ["experiment"] + [f"param:{k}" for k in params]
    header += [f"metric:{k}" for k in metrics] + [f"cert:{k}" for k in metrics]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        line = [r.experiment]
        line += [_cell(r.inputs[k]) if k in r.inputs else "" for k in params]
        line += [_cell(r.metrics[k]) if k in r.metrics else "" for k in metrics]
        line += [r.certificates.get(k, "") for k in metrics]
        w.writerow(line)
    return buf.getvalue()


def rows_to_json(rows):
    rows = sorted(rows, key=ResultRow.sort_key)
    return json.dumps([r.as_dict() for r in rows], indent=2, sort_keys=True) + "\n"
