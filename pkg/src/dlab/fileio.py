"""Binary file formats for grid and space-time data.

GF01 (single GridFunction):
    magic 'G','F','0','1'; u64 LE n; f64 LE length; f64 LE x0;
    u8 side (0 physical, 1 fourier); then n pairs of f64 LE (re, im).

STF1 (SpaceTimeField, frames stored physical-side):
    magic 'S','T','F','1'; u64 LE frame count M; u64 LE n; f64 LE length;
    f64 LE x0; then M records of (f64 LE t; n pairs of f64 LE (re, im)).
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import FOURIER, PHYSICAL, Grid, GridFunction, SpaceTimeField

GF_MAGIC = b"GF01"
STF_MAGIC = b"STF1"

_SIDE_CODE = {PHYSICAL: 0, FOURIER: 1}
_SIDE_NAME = {0: PHYSICAL, 1: FOURIER}


class GridFileError(ValueError):
    """Structured I/O error for GF01/STF1 data."""


def _take(buf: bytes, offset: int, size: int, what: str) -> tuple[bytes, int]:
    if offset + size > len(buf):
        raise GridFileError(f"unexpected end of data while reading {what}")
    return buf[offset : offset + size], offset + size


def _pack_complex(values: np.ndarray) -> bytes:
    flat = np.empty(2 * values.size, dtype="<f8")
    flat[0::2] = values.real
    flat[1::2] = values.imag
    return flat.tobytes()


def _unpack_complex(raw: bytes, n: int) -> np.ndarray:
    flat = np.frombuffer(raw, dtype="<f8")
    return flat[0::2] + 1j * flat[1::2]


def write_grid_function(f: GridFunction, path) -> None:
    header = GF_MAGIC + struct.pack(
        "<Qddb", f.grid.n, f.grid.length, f.grid.x0, _SIDE_CODE[f.side]
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(_pack_complex(f.values))


def read_grid_function(path) -> GridFunction:
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, off = _take(buf, 0, 4, "magic")
    if magic != GF_MAGIC:
        raise GridFileError(f"bad magic {magic!r}, expected {GF_MAGIC!r}")
    raw, off = _take(buf, off, 8 + 8 + 8 + 1, "header")
    n, length, x0, side_code = struct.unpack("<Qddb", raw)
    if side_code not in _SIDE_NAME:
        raise GridFileError(f"unknown side code {side_code}")
    raw, off = _take(buf, off, 16 * n, "sample data")
    values = _unpack_complex(raw, n)
    if off != len(buf):
        raise GridFileError(f"{len(buf) - off} trailing bytes after sample data")
    if not np.all(np.isfinite(values.view(np.float64))):
        raise GridFileError("non-finite sample values")
    try:
        grid = Grid(int(n), length, x0)
    except ValueError as exc:
        raise GridFileError(str(exc)) from exc
    return GridFunction(grid, values, _SIDE_NAME[side_code])


def write_space_time_field(field: SpaceTimeField, path) -> None:
    g = field.grid
    header = STF_MAGIC + struct.pack("<QQdd", len(field), g.n, g.length, g.x0)
    with open(path, "wb") as fh:
        fh.write(header)
        for t, frame in zip(field.times, field.frames):
            fh.write(struct.pack("<d", t))
            fh.write(_pack_complex(frame.to_physical().values))


def read_space_time_field(path) -> SpaceTimeField:
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, off = _take(buf, 0, 4, "magic")
    if magic != STF_MAGIC:
        raise GridFileError(f"bad magic {magic!r}, expected {STF_MAGIC!r}")
    raw, off = _take(buf, off, 8 + 8 + 8 + 8, "header")
    m, n, length, x0 = struct.unpack("<QQdd", raw)
    try:
        grid = Grid(int(n), length, x0)
    except ValueError as exc:
        raise GridFileError(str(exc)) from exc
    times = np.empty(m)
    frames = []
    for i in range(m):
        raw, off = _take(buf, off, 8, f"time stamp {i}")
        (times[i],) = struct.unpack("<d", raw)
        raw, off = _take(buf, off, 16 * n, f"frame {i}")
        values = _unpack_complex(raw, n)
        if not np.all(np.isfinite(values.view(np.float64))):
            raise GridFileError(f"non-finite values in frame {i}")
        frames.append(GridFunction(grid, values, PHYSICAL))
    if off != len(buf):
        raise GridFileError(f"{len(buf) - off} trailing bytes after frame data")
    return SpaceTimeField(grid, times, frames)
