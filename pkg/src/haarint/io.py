"""Matrix text files and deterministic JSON/CSV emitters."""

import csv
import io
import json
import math

import numpy as np

from .errors import DimensionError
from .linalg import LogValue, as_matrix


def read_matrix(path):
    """Read ``rows cols`` then ``rows*cols`` whitespace-separated ``re im`` pairs."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise DimensionError(f"{path}: missing 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    nums = [float(t) for t in tokens[2:]]
    if len(nums) != 2 * rows * cols:
        raise DimensionError(f"{path}: expected {2 * rows * cols} numbers after the header, got {len(nums)}")
    arr = np.array(nums).reshape(rows, cols, 2)
    return as_matrix(arr[..., 0] + 1j * arr[..., 1])


def write_matrix(path, M):
    M = as_matrix(M)
    with open(path, "w") as fh:
        fh.write(f"{M.shape[0]} {M.shape[1]}\n")
        for row in M:
            fh.write(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row) + "\n")


def parse_matrix_arg(text):
    """A scalar (``"0.8"``, ``"1+2j"``) becomes 1x1; anything else is a matrix file path."""
    try:
        return as_matrix(complex(text.replace(" ", "")))
    except ValueError:
        return read_matrix(text)


def jsonable(obj):
    """Convert numpy scalars/arrays, complex numbers and LogValues to plain JSON types."""
    if isinstance(obj, LogValue):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_json(obj):
    """Sorted keys and shortest round-trip floats, so equal input gives equal bytes."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def dumps_csv(rows):
    """Rows (dicts with identical keys) as CSV text; floats use ``repr``."""
    rows = [jsonable(r) for r in rows]
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: "" if v is None else (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def loads_csv(text):
    """Inverse of :func:`dumps_csv` for numeric columns."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for k, v in row.items():
            if v == "":
                parsed[k] = None
                continue
            try:
                parsed[k] = int(v)
            except ValueError:
                try:
                    parsed[k] = float(v)
                except ValueError:
                    parsed[k] = v
        out.append(parsed)
    return out
