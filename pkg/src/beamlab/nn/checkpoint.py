"""Versioned binary parameter checkpoints with a JSON metadata sidecar.

Layout: magic ``BMCP``, u32 format version, u32 entry count, then per entry
a name, a shape table, and the raw little-endian float64 values. Metadata
(hyperparameters, seed, training epochs, ...) lives next to the blob in
``<path>.json`` so it stays human-readable.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import DataFormatError, DataTruncatedError, DataVersionError

MAGIC = b"BMCP"
VERSION = 1


def save_tensors(path, named_arrays: list, meta: dict) -> None:
    """Write ``(name, array)`` pairs in order; order is part of the format."""
    path = Path(path)
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<II", VERSION, len(named_arrays))
    for name, array in named_arrays:
        encoded = name.encode("utf-8")
        array = np.asarray(array, dtype="<f8", order="C")
        blob += struct.pack("<H", len(encoded))
        blob += encoded
        blob += struct.pack("<B", array.ndim)
        blob += struct.pack(f"<{array.ndim}I", *array.shape) if array.ndim else b""
        blob += array.tobytes()
    path.write_bytes(bytes(blob))
    sidecar = path.with_name(path.name + ".json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


class _Reader:
    def __init__(self, data: bytes, label: str):
        self.data = data
        self.offset = 0
        self.label = label

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise DataTruncatedError(f"{self.label} ends mid-record", self.offset)
        out = self.data[self.offset:self.offset + n]
        self.offset += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_tensors(path) -> tuple:
    """Read a checkpoint; returns (ordered name->array dict, metadata dict)."""
    path = Path(path)
    reader = _Reader(path.read_bytes(), f"checkpoint {path.name}")
    if reader.take(4) != MAGIC:
        raise DataFormatError(f"{path} is not a parameter checkpoint (bad magic)")
    version, count = reader.unpack("<II")
    if version != VERSION:
        raise DataVersionError(f"checkpoint version {version} not supported "
                               f"(expected {VERSION})")
    arrays = {}
    for _ in range(count):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I") if ndim else ()
        n_values = int(np.prod(shape)) if shape else 1
        raw = reader.take(8 * n_values)
        arrays[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    sidecar = path.with_name(path.name + ".json")
    if not sidecar.exists():
        raise DataFormatError(f"missing metadata sidecar {sidecar}")
    meta = json.loads(sidecar.read_text())
    return arrays, meta
