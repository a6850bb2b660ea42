"""Matrix files and atomic report writing.

A matrix file is a JSON object ``{"n": int, "re": [[...]], "im": [[...]]}``
holding row-major real and imaginary parts. A perturbed-Hamiltonian file
bundles two of them: ``{"h0": {...}, "h1": {...}}``.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ParseError


def matrix_to_dict(a) -> dict:
    a = np.asarray(a, dtype=complex)
    # json emits the shortest repr that round-trips, i.e. the full double
    return {"n": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_dict(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict) or not {"n", "re", "im"} <= obj.keys():
        raise ParseError(f"{where}: expected an object with keys n, re, im")
    n = obj["n"]
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: non-numeric entries ({exc})") from None
    if not isinstance(n, int) or re.shape != (n, n) or im.shape != (n, n):
        raise ParseError(f"{where}: re/im must both be {n}x{n} arrays")
    return re + 1j * im


def _load_json(path) -> object:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from None


def read_matrix(path) -> np.ndarray:
    return matrix_from_dict(_load_json(path), str(path))


def read_hamiltonian_pair(path) -> tuple[np.ndarray, np.ndarray]:
    obj = _load_json(path)
    if not isinstance(obj, dict) or not {"h0", "h1"} <= obj.keys():
        raise ParseError(f"{path}: expected an object with keys h0 and h1")
    return matrix_from_dict(obj["h0"], f"{path}:h0"), matrix_from_dict(obj["h1"], f"{path}:h1")


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def write_matrix(path, a) -> None:
    write_json(path, matrix_to_dict(a))
