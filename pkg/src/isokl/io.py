"""Reading and writing ``.cmat.json`` matrices and bundle manifests.

File layout::

    {"rows": m, "cols": n, "entries": [[re, im], ...]}

Entries are row-major.  Floats are written with 17 significant digits so a
read after write reproduces every double exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .linalg import as_matrix

CMAT_SUFFIX = ".cmat.json"


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("cannot serialise non-finite value")
    s = "%.17g" % x
    # keep it a JSON float literal
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def dumps_cmat(m) -> str:
    a = as_matrix(m)
    rows, cols = a.shape
    entries = ", ".join(f"[{_fmt(z.real)}, {_fmt(z.imag)}]" for z in a.ravel())
    return f'{{"rows": {rows}, "cols": {cols}, "entries": [{entries}]}}'


def cmat_to_obj(m) -> dict:
    """JSON-ready dict form (for embedding a matrix inline in a report)."""
    return json.loads(dumps_cmat(m))


def cmat_from_obj(obj: dict) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed cmat object: {exc}") from None
    if rows <= 0 or cols <= 0:
        raise ValueError("rows and cols must be positive")
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, found {len(entries)}")
    try:
        arr = np.array([complex(float(re), float(im)) for re, im in entries], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"malformed entry: {exc}") from None
    return as_matrix(arr.reshape(rows, cols))


def loads_cmat(text: str) -> np.ndarray:
    return cmat_from_obj(json.loads(text))


def read_cmat(path) -> np.ndarray:
    return loads_cmat(Path(path).read_text())


def write_cmat(path, m) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_cmat(m) + "\n")
    return path


def write_manifest(directory, manifest: dict) -> Path:
    path = Path(directory) / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(directory) -> dict:
    return json.loads((Path(directory) / "manifest.json").read_text())
