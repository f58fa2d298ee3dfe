"""JSON file formats for channels, decompositions and unitaries.

Every document carries ``schema: 1`` and a ``kind``.  Complex entries are
``[re, im]`` pairs; floats are written with Python's shortest round-trip
repr, so write-then-read is bit exact.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import OQECError
from .noiseless import COLUMN_CONVENTION, SubsystemDecomposition
from .matkit import DEFAULT_TOL, Tolerance

SCHEMA = 1


class InputError(OQECError):
    """Unreadable or malformed input file."""


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _decode_entry(x, where: str) -> complex:
    if (not isinstance(x, list) or len(x) != 2
            or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x)):
        raise InputError(f"{where}: expected [re, im] pair of numbers, got {json.dumps(x)[:40]}")
    return complex(x[0], x[1])


def decode_matrix(rows, where: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputError(f"{where}: expected a non-empty list of rows")
    width = len(rows[0])
    out = np.empty((len(rows), width), dtype=complex)
    for i, r in enumerate(rows):
        if len(r) != width:
            raise InputError(f"{where}[{i}]: row has {len(r)} entries, expected {width}")
        for j, x in enumerate(r):
            out[i, j] = _decode_entry(x, f"{where}[{i}][{j}]")
    if shape is not None and out.shape != shape:
        raise InputError(f"{where}: shape {out.shape}, expected {shape}")
    return out


def _field(doc: dict, key: str, kind=None):
    if key not in doc:
        raise InputError(f"missing field '{key}'")
    val = doc[key]
    if kind is int and (not isinstance(val, int) or isinstance(val, bool) or val < 1):
        raise InputError(f"field '{key}': expected a positive integer, got {val!r}")
    return val


def read_document(path, kind: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    if doc.get("schema") != SCHEMA:
        raise InputError(f"{path}: field 'schema': expected {SCHEMA}, got {doc.get('schema')!r}")
    if doc.get("kind") != kind:
        raise InputError(f"{path}: field 'kind': expected {kind!r}, got {doc.get('kind')!r}")
    return doc


def write_document(path, doc: dict) -> Path:
    """Write atomically: temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def channel_doc(kraus, provenance: str | None = None) -> dict:
    kraus = np.asarray(kraus)
    doc = {"schema": SCHEMA, "kind": "channel", "dim": int(kraus.shape[1]),
           "kraus": [encode_matrix(k) for k in kraus]}
    if provenance:
        doc["provenance"] = provenance
    return doc


def read_kraus(path) -> np.ndarray:
    """Kraus operators as stored; no trace-preservation check."""
    doc = read_document(path, "channel")
    d = _field(doc, "dim", int)
    ks = _field(doc, "kraus")
    if not isinstance(ks, list) or not ks:
        raise InputError(f"{path}: field 'kraus': expected a non-empty list")
    try:
        return np.stack([decode_matrix(k, f"kraus[{a}]", (d, d)) for a, k in enumerate(ks)])
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def decomposition_doc(dec: SubsystemDecomposition) -> dict:
    return {"schema": SCHEMA, "kind": "decomposition", "dim": dec.dim, "m": dec.m, "n": dec.n,
            "convention": COLUMN_CONVENTION, "isometry": encode_matrix(dec.isometry)}


def read_decomposition(path, tol: Tolerance = DEFAULT_TOL) -> SubsystemDecomposition:
    doc = read_document(path, "decomposition")
    d, m, n = (_field(doc, k, int) for k in ("dim", "m", "n"))
    try:
        v = decode_matrix(_field(doc, "isometry"), "isometry", (d, m * n))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
    return SubsystemDecomposition(v, m, n, tol)


def unitary_doc(u) -> dict:
    u = np.asarray(u)
    return {"schema": SCHEMA, "kind": "unitary", "dim": int(u.shape[0]), "matrix": encode_matrix(u)}


def read_unitary(path) -> np.ndarray:
    doc = read_document(path, "unitary")
    d = _field(doc, "dim", int)
    try:
        return decode_matrix(_field(doc, "matrix"), "matrix", (d, d))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
