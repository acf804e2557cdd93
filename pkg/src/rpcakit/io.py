"""Matrix and trace file formats.

Binary matrix layout::

    b"RPCA" | u16 version (=1) | u32 rows | u32 cols | rows*cols f64, row-major

All integers and floats are little-endian.  The CSV alternative is plain
comma-separated numeric rows without a header.
"""

from __future__ import annotations

import csv
import io
import struct
from pathlib import Path

import numpy as np

from .model import TraceRecord, as_matrix

MAGIC = b"RPCA"
VERSION = 1
_HEADER = struct.Struct("<4sHII")

TRACE_COLUMNS = ("iter", "elapsed_seconds", "objective", "primal_residual",
                 "rel_error", "stationarity")


class MatrixFormatError(ValueError):
    pass


def matrix_to_bytes(Z) -> bytes:
    Z = as_matrix(Z)
    rows, cols = Z.shape
    body = np.ascontiguousarray(Z, dtype="<f8").tobytes(order="C")
    return _HEADER.pack(MAGIC, VERSION, rows, cols) + body


def matrix_from_bytes(buf: bytes) -> np.ndarray:
    if len(buf) < _HEADER.size:
        raise MatrixFormatError("truncated header")
    magic, version, rows, cols = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise MatrixFormatError(f"unsupported version {version}")
    expected = _HEADER.size + 8 * rows * cols
    if len(buf) != expected:
        raise MatrixFormatError(f"expected {expected} bytes, found {len(buf)}")
    Z = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).reshape(rows, cols)
    return as_matrix(Z.astype(np.float64))


def save_matrix(path, Z) -> Path:
    """Write `Z`; ``.csv`` suffix selects CSV, anything else the binary format."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        Z = as_matrix(Z)
        with open(path, "w", newline="") as fh:
            for row in Z:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    else:
        path.write_bytes(matrix_to_bytes(Z))
    return path


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    buf = path.read_bytes()
    if buf[:4] == MAGIC:
        return matrix_from_bytes(buf)
    try:
        Z = np.loadtxt(io.StringIO(buf.decode("ascii")), delimiter=",", ndmin=2)
    except (UnicodeDecodeError, ValueError) as exc:
        raise MatrixFormatError(f"{path}: neither binary nor numeric CSV ({exc})") from exc
    return as_matrix(Z, str(path))


def _cell(x):
    return "" if x is None else repr(float(x))


def write_trace_csv(path_or_file, records) -> None:
    own = not hasattr(path_or_file, "write")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in records:
            w.writerow([r.iter, repr(float(r.elapsed_seconds)), repr(float(r.objective)),
                        repr(float(r.primal_residual)), _cell(r.rel_error), _cell(r.stationarity)])
    finally:
        if own:
            fh.close()


def read_trace_csv(path) -> list:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise MatrixFormatError(f"unexpected trace header {reader.fieldnames}")
        for row in reader:
            opt = lambda k: None if row[k] == "" else float(row[k])  # noqa: E731
            out.append(TraceRecord(int(row["iter"]), float(row["elapsed_seconds"]),
                                   float(row["objective"]), float(row["primal_residual"]),
                                   opt("rel_error"), opt("stationarity")))
    return out
