"""Binary matrix container and JSON-lines sentence files.

One binary format carries embeddings, surprisal vectors, and probability
matrices, distinguished by a kind byte. Header layout (little-endian):
magic "ALPE" (4 bytes), version uint16 (= 1), kind uint8, rows uint32,
cols uint32, followed by rows*cols float32 values in row-major order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .errors import DataFormatError

MAGIC = b"ALPE"
VERSION = 1

KIND_EMBEDDING = 1
KIND_SURPRISAL = 2
KIND_PROBABILITY = 3

_HEADER = struct.Struct("<4sHBII")

PathLike = Union[str, Path]


def write_matrix(path: PathLike, kind: int, matrix: np.ndarray) -> None:
    """Write a 2-D matrix; read_matrix(path) returns it bit-for-bit."""
    if kind not in (KIND_EMBEDDING, KIND_SURPRISAL, KIND_PROBABILITY):
        raise DataFormatError(f"unknown matrix kind {kind}")
    arr = np.asarray(matrix, dtype="<f4")
    if arr.ndim != 2:
        raise DataFormatError(f"expected a 2-D matrix, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise DataFormatError("matrix contains non-finite entries")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, kind, arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes(order="C"))


def read_matrix(path: PathLike) -> tuple[int, np.ndarray]:
    """Read a matrix file, returning (kind, float32 array)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise DataFormatError(f"{path}: truncated header")
    magic, version, kind, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}")
    if kind not in (KIND_EMBEDDING, KIND_SURPRISAL, KIND_PROBABILITY):
        raise DataFormatError(f"{path}: unknown kind {kind}")
    payload = raw[_HEADER.size :]
    expected = rows * cols * 4
    if len(payload) != expected:
        raise DataFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    matrix = np.frombuffer(payload, dtype="<f4").reshape(rows, cols).copy()
    return kind, matrix


def read_sentences(path: PathLike) -> list[dict]:
    """Read a JSON-lines sentence file into a list of raw record dicts."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if not isinstance(obj, dict):
                raise DataFormatError(f"{path}:{lineno}: expected a JSON object")
            records.append(obj)
    return records


def write_sentences(path: PathLike, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
