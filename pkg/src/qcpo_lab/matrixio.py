"""JSON matrix files and deterministic report serialisation.

A matrix file looks like::

    {"kind": "state", "dims": [2, 2], "data": [[0.5, 0], [0, 0], ...]}

``data`` holds row-major ``[re, im]`` pairs.  For ``kind == "matrix"`` the
dims are ``[rows, cols]``; for ``state``, ``qcpo`` and ``choi`` they are the
factor dimensions ``[nA, nB]`` of a square operator of size ``nA*nB``.
Floats are written with 17 significant digits so that parsing restores
them bit for bit.
"""

import csv
import io
import json
import math
from typing import Tuple

import numpy as np

KINDS = ("matrix", "state", "qcpo", "choi")


class MatrixFileError(ValueError):
    """Malformed or inconsistent matrix file."""


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    if x == 0 and math.copysign(1.0, x) < 0:
        # JSON readers parse "-0" as the integer 0 and drop the sign.
        return "-0.0"
    return format(x, ".17g")


def dumps(obj) -> str:
    """JSON text with fixed key order (insertion order) and 17-digit floats.

    Complex arrays become nested lists of ``[re, im]`` pairs.
    """
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return "[" + format_float(obj.real) + ", " + format_float(obj.imag) + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (json.dumps(str(k)) + ": " + dumps(v) for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return dumps([complex(z) for z in obj.reshape(-1)]) if obj.ndim == 1 else dumps(list(obj))
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_document(matrix, kind: str, dims=None) -> dict:
    m = np.asarray(matrix, dtype=complex)
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if kind == "matrix":
        dims = list(m.shape)
    else:
        if dims is None:
            n = int(round(math.sqrt(m.shape[0])))
            dims = [n, n]
        dims = [int(d) for d in dims]
    return {"kind": kind, "dims": dims, "data": m.reshape(-1)}


def write_matrix(matrix, kind: str, dims=None) -> str:
    return dumps(to_document(matrix, kind, dims)) + "\n"


def parse_matrix(text: str) -> Tuple[np.ndarray, str, Tuple[int, int]]:
    """Parse a matrix file; returns ``(matrix, kind, dims)``.

    Raises :class:`MatrixFileError` with a message naming the defect.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MatrixFileError("malformed matrix file: top level must be an object")
    kind = doc.get("kind", "matrix")
    if kind not in KINDS:
        raise MatrixFileError(f"unknown kind {kind!r}; expected one of {KINDS}")
    dims = doc.get("dims")
    data = doc.get("data")
    if not isinstance(dims, list) or len(dims) != 2 or not all(isinstance(d, int) and d > 0 for d in dims):
        raise MatrixFileError("dimension mismatch: dims must be two positive integers")
    if not isinstance(data, list):
        raise MatrixFileError("malformed matrix file: data must be a list of [re, im] pairs")
    if kind == "matrix":
        shape = (dims[0], dims[1])
    else:
        size = dims[0] * dims[1]
        shape = (size, size)
    if len(data) != shape[0] * shape[1]:
        raise MatrixFileError(f"dimension mismatch: dims {dims} need {shape[0] * shape[1]} entries, got {len(data)}")
    try:
        arr = np.array([complex(float(p[0]), float(p[1])) for p in data], dtype=complex)
    except (TypeError, ValueError, IndexError):
        raise MatrixFileError("malformed matrix file: each entry must be an [re, im] pair of numbers") from None
    if len(data) and any(len(p) != 2 for p in data):
        raise MatrixFileError("malformed matrix file: each entry must be an [re, im] pair of numbers")
    return arr.reshape(shape), kind, (dims[0], dims[1])


def read_matrix(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def csv_text(header, rows) -> str:
    """CSV with floats at 17 significant digits and booleans as ``true``/``false``."""

    def cell(v):
        if v is None:
            return ""
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return format_float(v)
        return str(v)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([cell(v) for v in row])
    return buf.getvalue()
