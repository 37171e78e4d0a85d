"""Readers for the phonoctl file formats.

These parse the published interfaces only: ``# schema=<name>/v1`` CSV files,
``PHGRID1``-tagged binary grids, and the ``grid/v1`` JSON sidecars.  Unknown
schema names or versions are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

GRID_MAGIC = b"PHGRID1\x00"


class SchemaError(ValueError):
    """The input file does not match the declared schema."""


def read_csv(path, expected_schema: str):
    """Parse a schema-tagged CSV into (header, list of row tuples).

    Numeric fields become floats; anything else stays a string.
    """
    lines = Path(path).read_text().strip().splitlines()
    if not lines or not lines[0].startswith("# schema="):
        raise SchemaError(f"{path}: missing '# schema=' header line")
    tag = lines[0].split("=", 1)[1].strip()
    name, _, version = tag.partition("/")
    if name != expected_schema or version != "v1":
        raise SchemaError(f"{path}: schema {tag!r}, expected {expected_schema}/v1")
    header = [h.strip() for h in lines[1].split(",")]
    rows = []
    for ln in lines[2:]:
        if not ln.strip():
            continue
        cells = ln.split(",")
        if len(cells) != len(header):
            raise SchemaError(f"{path}: row has {len(cells)} cells, expected {len(header)}")
        parsed = []
        for cell in cells:
            try:
                parsed.append(float(cell))
            except ValueError:
                parsed.append(cell.strip())
        rows.append(tuple(parsed))
    return header, rows


def columns(header, rows, *names):
    """Extract named numeric columns as arrays."""
    out = []
    for name in names:
        if name not in header:
            raise SchemaError(f"missing column {name!r}; have {header}")
        i = header.index(name)
        out.append(np.array([row[i] for row in rows]))
    return out


def read_grid(path):
    """Read a binary grid plus sidecar into (values, meta dict)."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != GRID_MAGIC:
            raise SchemaError(f"{path}: bad magic {magic!r}")
        rows, cols = np.frombuffer(fh.read(16), dtype=np.int64)
        eps, t = np.frombuffer(fh.read(16), dtype=np.float64)
        values = np.frombuffer(fh.read(), dtype=complex).reshape(int(rows), int(cols))
    sidecar = Path(str(path) + ".json")
    with open(sidecar) as fh:
        meta = json.load(fh)
    if meta.get("schema") != "grid/v1":
        raise SchemaError(f"{sidecar}: unknown schema {meta.get('schema')!r}")
    if list(values.shape) != meta.get("dims"):
        raise SchemaError(f"{sidecar}: dims {meta.get('dims')} do not match payload {values.shape}")
    meta = dict(meta)
    meta["eps_payload"] = float(eps)
    meta["t_payload"] = float(t)
    return values, meta
