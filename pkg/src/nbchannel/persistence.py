"""Binary checkpoints and CSV streaming of diagnostic records.

Checkpoint layout (little-endian)::

    b"NBCH" | u32 version=1 | u64 nx | u64 ny | f64 L | f64 Y | f64 t
    | xi[ny*nx] f64 | theta[ny*nx] f64 | psi[ny*nx] f64

Fields are stored row-major by y then x.
"""

from __future__ import annotations

import csv
import os
import struct
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import numpy as np
from filelock import FileLock, Timeout

from .core import GridSpec, State
from .diagnostics import DiagRecord

MAGIC = b"NBCH"
VERSION = 1
_HEADER = struct.Struct("<4sIQQddd")


class CheckpointError(IOError):
    pass


class CSVSchemaError(ValueError):
    pass


@contextmanager
def exclusive(path, timeout: float = 0.0):
    """Hold ``<path>.lock`` for the duration; fails fast if another writer has it."""
    lock = FileLock(str(path) + ".lock", timeout=timeout)
    try:
        with lock:
            yield
    except Timeout as exc:
        raise CheckpointError(f"{path} is locked by another writer") from exc


def save_checkpoint(state: State, path) -> None:
    g = state.grid
    header = _HEADER.pack(MAGIC, VERSION, g.nx, g.ny, g.L, g.Y, state.t)
    body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes()
                    for a in (state.xi, state.theta, state.psi))
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with exclusive(path):
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(body)
        os.replace(tmp, path)


def load_checkpoint(path, expect: Optional[GridSpec] = None) -> State:
    """Read a checkpoint; ``expect`` rejects files from a different grid."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(data) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, nx, ny, L, Y, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    n = nx * ny
    want = _HEADER.size + 3 * 8 * n
    if len(data) != want:
        raise CheckpointError(f"{path}: expected {want} bytes, found {len(data)}")
    grid = GridSpec(L, Y, int(nx), int(ny))
    if expect is not None and (expect.nx, expect.ny) != (grid.nx, grid.ny):
        raise CheckpointError(
            f"{path}: dimension mismatch, file is {grid.nx}x{grid.ny}, "
            f"expected {expect.nx}x{expect.ny}"
        )
    blocks = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(3, ny, nx)
    xi, theta, psi = (np.array(b, dtype=float) for b in blocks)
    return State(t=t, xi=xi, theta=theta, psi=psi, grid=grid)


def _fmt(v) -> str:
    return "" if v is None else format(float(v), ".17g")


def append_record(record: DiagRecord, csv_path) -> None:
    """Append one row; the header is written when the file is new or empty."""
    path = Path(csv_path)
    cols = record.columns()
    with exclusive(path):
        fresh = not path.exists() or path.stat().st_size == 0
        if not fresh:
            with open(path, newline="") as fh:
                header = next(csv.reader(fh), None)
            if header != cols:
                raise CSVSchemaError(f"{path}: columns {cols} do not match header {header}")
        with open(path, "a", newline="") as fh:
            w = csv.writer(fh)
            if fresh:
                w.writerow(cols)
            w.writerow([_fmt(v) for v in record.values()])


class RecordWriter:
    """Streams records of one run into a CSV, holding the lock throughout."""

    def __init__(self, csv_path):
        self.path = Path(csv_path)
        self._cm = None
        self._fh = None
        self._writer = None
        self._cols: Optional[list[str]] = None

    def __enter__(self) -> "RecordWriter":
        self._cm = exclusive(self.path)
        self._cm.__enter__()
        if self.path.exists() and self.path.stat().st_size > 0:
            with open(self.path, newline="") as fh:
                self._cols = next(csv.reader(fh), None)
        self._fh = open(self.path, "a", newline="")
        self._writer = csv.writer(self._fh)
        return self

    def __call__(self, record: DiagRecord) -> None:
        cols = record.columns()
        if self._cols is None:
            self._writer.writerow(cols)
            self._cols = cols
        elif cols != self._cols:
            raise CSVSchemaError(f"{self.path}: columns {cols} do not match header {self._cols}")
        self._writer.writerow([_fmt(v) for v in record.values()])

    def __exit__(self, *exc) -> None:
        self._fh.close()
        self._cm.__exit__(*exc)


def read_records(csv_path) -> tuple[list[str], np.ndarray]:
    """Load a diagnostics CSV as ``(columns, array)``; blank cells become NaN."""
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    cols, body = rows[0], rows[1:]
    arr = np.array([[float(c) if c else np.nan for c in r] for r in body], dtype=float)
    return cols, arr.reshape(len(body), len(cols))
