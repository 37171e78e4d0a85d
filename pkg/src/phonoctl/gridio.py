"""Binary grid format with a JSON sidecar.

Layout of ``<name>.bin``: 8-byte magic ``PHGRID1\\0``, two int64 (rows, cols),
two float64 (eps, t), then the payload as row-major complex doubles.  The
sidecar ``<name>.bin.json`` carries the grid axes and, for kinetic fields,
the atom-channel weights.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import GridMismatch
from .wigner import KineticField, WignerGrid

MAGIC = b"PHGRID1\x00"


def _write_payload(path: Path, values: np.ndarray, eps: float, t: float):
    values = np.ascontiguousarray(values, dtype=complex)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.array(values.shape, dtype=np.int64).tobytes())
        fh.write(np.array([eps, t], dtype=np.float64).tobytes())
        fh.write(values.tobytes())


def _read_payload(path: Path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise GridMismatch(f"{path} is not a grid file (bad magic)")
        rows, cols = np.frombuffer(fh.read(16), dtype=np.int64)
        eps, t = np.frombuffer(fh.read(16), dtype=np.float64)
        values = np.frombuffer(fh.read(), dtype=complex).reshape(int(rows), int(cols))
    return values, float(eps), float(t)


def save_grid(path, obj):
    """Serialize a WignerGrid or KineticField to <path> plus <path>.json."""
    path = Path(path)
    if isinstance(obj, WignerGrid):
        _write_payload(path, obj.values, obj.eps, obj.t)
        meta = {
            "schema": "grid/v1",
            "kind": f"wigner_{obj.space}",
            "dims": list(obj.values.shape),
            "eps": obj.eps,
            "t": obj.t,
            "k_grid": obj.k_grid.tolist(),
            "xi_grid": obj.xi_grid.tolist() if obj.xi_grid is not None else None,
            "x_grid": obj.x_grid.tolist() if obj.x_grid is not None else None,
            "stderr_mean": float(np.mean(obj.stderr)),
        }
    elif isinstance(obj, KineticField):
        _write_payload(path, obj.regular, 0.0, obj.t)
        meta = {
            "schema": "grid/v1",
            "kind": "kinetic",
            "dims": list(obj.regular.shape),
            "eps": 0.0,
            "t": obj.t,
            "k_grid": obj.k_grid.tolist(),
            "x_grid": obj.x_grid.tolist(),
            "atom_weight": obj.atom_weight.tolist(),
            "v_g": obj.v_g.tolist(),
        }
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")
    with open(str(path) + ".json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_grid(path):
    """Load a grid file back into a WignerGrid or KineticField."""
    path = Path(path)
    values, eps, t = _read_payload(path)
    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    if meta.get("schema") != "grid/v1":
        raise GridMismatch(f"unknown sidecar schema {meta.get('schema')!r}")
    kind = meta["kind"]
    k_grid = np.array(meta["k_grid"])
    if kind == "kinetic":
        return KineticField(
            t=t,
            x_grid=np.array(meta["x_grid"]),
            k_grid=k_grid,
            regular=np.real(values),
            atom_weight=np.array(meta["atom_weight"]),
            v_g=np.array(meta["v_g"]),
        )
    if kind in ("wigner_xi", "wigner_x"):
        space = kind.split("_")[1]
        return WignerGrid(
            t=t,
            eps=eps,
            k_grid=k_grid,
            values=np.real(values) if space == "x" else values,
            stderr=np.full(values.shape, meta.get("stderr_mean", 0.0)),
            space=space,
            xi_grid=np.array(meta["xi_grid"]) if meta.get("xi_grid") else None,
            x_grid=np.array(meta["x_grid"]) if meta.get("x_grid") else None,
        )
    raise GridMismatch(f"unknown grid kind {kind!r}")
