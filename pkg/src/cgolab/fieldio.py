"""Serialization: field binary/CSV files, run manifests with content hashes."""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .grid import Field, Grid2D

__all__ = [
    "write_field",
    "read_field",
    "write_field_csv",
    "write_csv",
    "write_manifest",
    "file_sha256",
]

_MAGIC = b"CGF1"
_REP_CODE = {"physical": 0, "spectral": 1}
_REP_NAME = {v: k for k, v in _REP_CODE.items()}


def write_field(path: str | Path, F: Field) -> Path:
    """Flat binary layout: header (L, N, rep tag, center), then N^2
    little-endian complex doubles, row-major."""
    path = Path(path)
    header = _MAGIC + struct.pack(
        "<dqBdd", F.grid.L, F.grid.N, _REP_CODE[F.rep], F.grid.center[0], F.grid.center[1]
    )
    body = np.ascontiguousarray(F.values, dtype="<c16").tobytes()
    path.write_bytes(header + body)
    return path


def read_field(path: str | Path) -> Field:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not a field file")
    L, N, rep, c1, c2 = struct.unpack_from("<dqBdd", raw, 4)
    offset = 4 + struct.calcsize("<dqBdd")
    values = np.frombuffer(raw, dtype="<c16", count=N * N, offset=offset).reshape(N, N)
    return Field(Grid2D(L, int(N), (c1, c2)), values.astype(np.complex128), _REP_NAME[rep])


def _fmt(x) -> str:
    if isinstance(x, complex):
        return f"{x.real!r}+{x.imag!r}j" if x.imag >= 0 else f"{x.real!r}{x.imag!r}j"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_field_csv(path: str | Path, F: Field) -> Path:
    """CSV rows (x1, x2, re, im) of the physical samples."""
    path = Path(path)
    X1, X2 = F.grid.mesh
    v = F.physical()
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("x1,x2,re,im\n")
        for i in range(F.grid.N):
            for j in range(F.grid.N):
                fh.write(f"{X1[i, j]!r},{X2[i, j]!r},{v[i, j].real!r},{v[i, j].imag!r}\n")
    return path


def write_csv(path: str | Path, header: list[str], rows: list[tuple]) -> Path:
    """RFC-4180-style CSV: '.' decimal separator, UTF-8, repr-exact floats."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def write_manifest(path: str | Path, entries: dict, files: list[Path] | None = None) -> Path:
    """Line-oriented ``key = value`` manifest, sorted keys, hashed file list."""
    path = Path(path)
    items = {str(k): _fmt(v) for k, v in entries.items()}
    for f in files or []:
        items[f"file.{Path(f).name}.sha256"] = file_sha256(f)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(items):
            fh.write(f"{key} = {items[key]}\n")
    return path
