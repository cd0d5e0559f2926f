"""Field snapshot files: a JSON header line plus raw float64 arrays.

Layout of a ``field-v1`` file: one UTF-8 JSON line

    {"schema": "field-v1", "d": ..., "n": ..., "period": ..., "kind": ...,
     "components": ...}

terminated by a newline, followed by the physical-space samples of each
component in order (component-major), each a C-order little-endian float64
array of shape (n, ..., n).
"""

from __future__ import annotations

import json

import numpy as np

from .fields import FIELD_KINDS, FieldError, SpectralField
from .grid import TorusGrid

SCHEMA = "field-v1"


class SnapshotError(IOError):
    """Malformed or inconsistent snapshot file."""


def write_field(path, field: SpectralField) -> None:
    if field.kind not in FIELD_KINDS:
        raise SnapshotError(f"kind {field.kind!r} has no snapshot representation")
    grid = field.grid
    header = {
        "schema": SCHEMA,
        "d": grid.d,
        "n": grid.n,
        "period": grid.period,
        "kind": field.kind,
        "components": field.ncomp,
    }
    phys = field.to_physical()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for c in range(field.ncomp):
            fh.write(np.ascontiguousarray(phys[c], dtype="<f8").tobytes())


def read_field(path) -> SpectralField:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SnapshotError(f"bad snapshot header: {exc}") from exc
        if header.get("schema") != SCHEMA:
            raise SnapshotError(f"unknown schema {header.get('schema')!r}")
        kind = header.get("kind")
        cls = FIELD_KINDS.get(kind)
        if cls is None:
            raise SnapshotError(f"unknown field kind {kind!r}")
        grid = TorusGrid(int(header["d"]), int(header["n"]),
                         float(header.get("period", 2.0 * np.pi)))
        ncomp = cls.ncomp_for(grid.d)
        if int(header.get("components", -1)) != ncomp:
            raise SnapshotError(
                f"component count {header.get('components')} does not match "
                f"kind {kind!r} in dimension {grid.d} (expected {ncomp})"
            )
        count = ncomp * grid.n**grid.d
        raw = np.frombuffer(fh.read(count * 8), dtype="<f8")
        if raw.size != count:
            raise SnapshotError("truncated snapshot payload")
    phys = raw.reshape((ncomp,) + grid.shape)
    try:
        return cls.from_physical(grid, phys)
    except FieldError as exc:
        raise SnapshotError(str(exc)) from exc
