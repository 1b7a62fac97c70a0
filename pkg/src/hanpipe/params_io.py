"""Flat parameter container: name -> shape -> float64 values.

Layout: a magic line, one JSON manifest line listing (name, shape) in
storage order, then the concatenated raw little-endian float64 buffers.
Fully deterministic and bit-exact under round-trip.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ModelError

MAGIC = b"HANPIPE-PARAMS 1\n"


def save_params(path, params: dict[str, "np.ndarray"]) -> None:
    manifest = [{"name": name, "shape": list(np.shape(value))}
                for name, value in params.items()]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(manifest).encode("utf-8") + b"\n")
        for value in params.values():
            data = getattr(value, "data", value)
            fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def load_params(path) -> dict[str, np.ndarray]:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ModelError(f"{path}: not a parameter container (bad magic {magic!r})")
        try:
            manifest = json.loads(fh.readline().decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: corrupt manifest: {exc}") from exc
        out = {}
        for entry in manifest:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ModelError(f"{path}: truncated data for parameter {entry['name']!r}")
            out[entry["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
        if fh.read(1):
            raise ModelError(f"{path}: trailing bytes after declared parameters")
    return out
