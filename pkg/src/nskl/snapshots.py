"""Binary field snapshot format.

Layout, all little-endian: magic "KLNS", u32 version = 1, u32 dim, dim x u32
points, dim x f64 box_length, u32 component count, then one row-major f64
array per component.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import Field, GridSpec, VectorField

MAGIC = b"KLNS"
VERSION = 1


class SnapshotFormatError(ValueError):
    pass


def write_snapshot(path, obj) -> None:
    """Write a Field or VectorField; reading back is bit-exact."""
    grid = obj.grid
    arrays = [obj.values] if isinstance(obj, Field) else list(obj.values)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, grid.dim))
        fh.write(struct.pack(f"<{grid.dim}I", *((grid.points,) * grid.dim)))
        fh.write(struct.pack(f"<{grid.dim}d", *grid.box_length))
        fh.write(struct.pack("<I", len(arrays)))
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_snapshot(path):
    """Read a snapshot; returns a Field for 1 component, else a VectorField."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {raw[:4]!r}")
    off = 4
    version, dim = struct.unpack_from("<II", raw, off)
    off += 8
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    points = struct.unpack_from(f"<{dim}I", raw, off)
    off += 4 * dim
    lengths = struct.unpack_from(f"<{dim}d", raw, off)
    off += 8 * dim
    if len(set(points)) != 1:
        raise SnapshotFormatError(f"{path}: per-axis point counts differ")
    (count,) = struct.unpack_from("<I", raw, off)
    off += 4
    grid = GridSpec(dim, points[0], lengths)
    per = grid.size * 8
    expected = off + count * per
    if len(raw) != expected:
        raise SnapshotFormatError(f"{path}: expected {expected} bytes, got {len(raw)}")
    arrays = []
    for _ in range(count):
        arrays.append(np.frombuffer(raw, dtype="<f8", count=grid.size, offset=off)
                      .reshape(grid.shape).astype(np.float64))
        off += per
    if count == 1:
        return Field(grid, arrays[0])
    if count != dim:
        raise SnapshotFormatError(f"{path}: {count} components on a dim-{dim} grid")
    return VectorField(grid, np.stack(arrays))
