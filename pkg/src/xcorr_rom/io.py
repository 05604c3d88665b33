"""Binary, JSON and CSV persistence of snapshots, bases and models.

Snapshot file (little-endian)::

    b"ROMSNAP1" | u32 version=1 | u32 n_dims | u64 size per axis
    | f64 (origin, extent) per axis | u64 N_T | f64 times[N_T]
    | f64 data[N_h * N_T], snapshot-contiguous

Basis file::

    b"ROMBASE1" | u64 N_h | u64 N_r | u64 n_sigma | f64 sigma[n_sigma]
    | f64 modes[N_h * N_r], column-major
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .reduction import CoefficientTable, PodBasis, energy_curve, numerical_rank
from .regression import fit_rbf, fit_shift_map
from .registration import RegisteredSet
from .snapshots import Grid, SnapshotSet

__all__ = [
    "write_snapshots",
    "read_snapshots",
    "sidecar_path",
    "write_registered",
    "read_registered",
    "write_basis",
    "read_basis",
    "write_energy_csv",
    "write_error_csv",
    "save_model",
    "load_model",
    "MODEL_FILES",
]

SNAP_MAGIC = b"ROMSNAP1"
BASIS_MAGIC = b"ROMBASE1"
SNAP_VERSION = 1
MODEL_FILES = ("meta.json", "basis.bin", "coeffs.csv", "shifts.json")


def _fmt(x):
    return repr(float(x))


class _Reader:
    def __init__(self, buf, path):
        self.buf = buf
        self.pos = 0
        self.path = path

    def take(self, fmt, count=1, what="field"):
        size = struct.calcsize(fmt) * count
        if self.pos + size > len(self.buf):
            raise FormatError(f"{self.path}: truncated while reading {what} at byte offset "
                              f"{self.pos} (need {size} bytes, {len(self.buf) - self.pos} left)")
        out = struct.unpack_from("<" + fmt * count, self.buf, self.pos)
        self.pos += size
        return out

    def array(self, count, what):
        size = 8 * count
        if self.pos + size > len(self.buf):
            raise FormatError(f"{self.path}: truncated while reading {what} at byte offset "
                              f"{self.pos} (need {size} bytes, {len(self.buf) - self.pos} left)")
        out = np.frombuffer(self.buf, dtype="<f8", count=count, offset=self.pos)
        self.pos += size
        return out.astype(float)

    def magic(self, expected):
        got = bytes(self.buf[:8])
        if got != expected:
            raise FormatError(f"{self.path}: bad magic {got!r} at byte offset 0, expected {expected!r}")
        self.pos = 8

    def finish(self):
        if self.pos != len(self.buf):
            raise FormatError(f"{self.path}: {len(self.buf) - self.pos} trailing bytes at offset {self.pos}")


def sidecar_path(path):
    """``run/wave.snap`` -> ``run/wave.meta.json``."""
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_snapshots(path, snapshots):
    """Write a snapshot file plus its JSON sidecar."""
    path = Path(path)
    g = snapshots.grid
    parts = [SNAP_MAGIC, struct.pack("<II", SNAP_VERSION, g.n_dims),
             struct.pack("<" + "Q" * g.n_dims, *g.sizes)]
    for lo, hi in zip(g.origin, g.extent):
        parts.append(struct.pack("<dd", lo, hi))
    parts.append(struct.pack("<Q", snapshots.n_snapshots))
    parts.append(np.asarray(snapshots.times, dtype="<f8").tobytes())
    parts.append(np.asarray(snapshots.data.T, dtype="<f8").tobytes())
    path.write_bytes(b"".join(parts))
    meta = {"field_name": snapshots.field_name, "params": snapshots.params}
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_snapshots(path):
    """Read a snapshot file; the sidecar is optional."""
    path = Path(path)
    r = _Reader(path.read_bytes(), path)
    r.magic(SNAP_MAGIC)
    version, n_dims = r.take("I", 2, "version/n_dims")
    if version != SNAP_VERSION:
        raise FormatError(f"{path}: unsupported version {version} at byte offset 8")
    if n_dims not in (1, 2):
        raise FormatError(f"{path}: invalid n_dims={n_dims} at byte offset 12")
    sizes = r.take("Q", n_dims, "axis sizes")
    bounds = r.take("d", 2 * n_dims, "origin/extent")
    (n_t,) = r.take("Q", 1, "N_T")
    times = r.array(n_t, "times")
    n_h = int(np.prod(sizes))
    data = r.array(n_h * n_t, "snapshot data").reshape(n_t, n_h).T
    r.finish()
    grid = Grid(sizes, bounds[0::2], bounds[1::2])
    field_name, params = "field", {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
        field_name = meta.get("field_name", field_name)
        params = meta.get("params", {})
    return SnapshotSet(grid, times, data, field_name, params)


def write_registered(path, registered):
    """Registered snapshots plus ``shifts.json`` in the same directory."""
    path = Path(path)
    write_snapshots(path, registered.snapshots)
    _write_shifts(path.parent / "shifts.json", registered.snapshots.times, registered.shifts,
                  registered.reference_index, registered.reference_time)
    return path


def read_registered(path):
    path = Path(path)
    snaps = read_snapshots(path)
    info = json.loads((path.parent / "shifts.json").read_text())
    shifts = np.array([row["lags"] for row in info["shifts"]], dtype=int)
    return RegisteredSet(snaps, shifts, info["reference_index"], info["reference_time"])


def _write_shifts(path, times, shifts, reference_index, reference_time):
    doc = {
        "reference_index": int(reference_index),
        "reference_time": float(reference_time),
        "shifts": [{"time": float(t), "lags": [int(k) for k in lag]}
                   for t, lag in zip(times, np.asarray(shifts).reshape(len(times), -1))],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_basis(path, basis):
    n_h, n_r = basis.modes.shape
    s = basis.singular_values
    blob = b"".join([BASIS_MAGIC, struct.pack("<QQQ", n_h, n_r, s.size),
                     np.asarray(s, dtype="<f8").tobytes(),
                     np.asarray(basis.modes.T, dtype="<f8").tobytes()])
    Path(path).write_bytes(blob)


def read_basis(path):
    path = Path(path)
    r = _Reader(path.read_bytes(), path)
    r.magic(BASIS_MAGIC)
    n_h, n_r, n_s = r.take("Q", 3, "basis dimensions")
    s = r.array(n_s, "singular values")
    modes = r.array(n_h * n_r, "modes").reshape(n_r, n_h).T
    r.finish()
    rk = numerical_rank(s)
    e = np.cumsum(s[:rk] ** 2)
    captured = float(e[min(n_r, rk) - 1] / e[-1]) if n_r else 0.0
    return PodBasis(modes, s, captured)


def write_energy_csv(path, basis):
    """``mode_index,sigma,energy_cumulative`` for every non-negligible mode."""
    energy = energy_curve(basis)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mode_index", "sigma", "energy_cumulative"])
        for i, (s, e) in enumerate(zip(basis.singular_values, energy), start=1):
            w.writerow([i, _fmt(s), _fmt(e)])


def write_error_csv(path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "relative_l2"])
        for t, e in zip(report.times, report.relative_l2):
            w.writerow([_fmt(t), _fmt(e)])


def _grid_doc(grid):
    return {"sizes": list(grid.sizes), "origin": list(grid.origin), "extent": list(grid.extent)}


def save_model(directory, model, extra=None):
    """Persist a :class:`~xcorr_rom.pipeline.RomModel` as a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cm, sm = model.coeff_model, model.shift_map
    meta = {
        "format": "xcorr-rom-model",
        "version": 1,
        "grid": _grid_doc(model.grid),
        "field_name": model.field_name,
        "registration_enabled": model.registration_enabled,
        "reference_index": model.reference_index,
        "reference_time": model.reference_time,
        "background": model.background,
        "rank": model.rank,
        "energy_captured": model.basis.energy_captured,
        "kernel": {"name": cm.kernel, "shape_parameter": cm.shape_parameter,
                   "ridge": cm.ridge, "extrapolation": cm.extrapolation},
        "shift_extrapolation": sm.extrapolation,
    }
    if extra:
        meta["extra"] = extra
    (directory / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    write_basis(directory / "basis.bin", model.basis)
    with open(directory / "coeffs.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time"] + [f"c{i + 1}" for i in range(model.rank)])
        for j, t in enumerate(model.coefficients.times):
            w.writerow([_fmt(t)] + [_fmt(c) for c in model.coefficients.coeffs[:, j]])
    _write_shifts(directory / "shifts.json", model.coefficients.times, model.shifts,
                  model.reference_index, model.reference_time)
    return directory


def load_model(directory):
    """Rebuild a model saved by :func:`save_model`; regressors are refitted."""
    from .pipeline import RomModel

    directory = Path(directory)
    missing = [name for name in MODEL_FILES if not (directory / name).is_file()]
    if missing:
        raise FormatError(f"model directory {directory} is missing: {', '.join(missing)}")
    meta = json.loads((directory / "meta.json").read_text())
    basis = read_basis(directory / "basis.bin")
    with open(directory / "coeffs.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    body = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    if body.ndim != 2 or body.shape[1] != basis.rank_selected + 1:
        raise FormatError(f"{directory / 'coeffs.csv'}: expected {basis.rank_selected + 1} columns")
    coeffs = CoefficientTable(body[:, 0], body[:, 1:].T)
    info = json.loads((directory / "shifts.json").read_text())
    shifts = np.array([row["lags"] for row in info["shifts"]], dtype=int)
    grid = Grid(**meta["grid"])
    k = meta["kernel"]
    coeff_model = fit_rbf(coeffs.times, coeffs, kernel=k["name"], shape_parameter=k["shape_parameter"],
                          ridge=k["ridge"], extrapolation=k["extrapolation"])
    shift_map = fit_shift_map(coeffs.times, shifts, extrapolation=meta["shift_extrapolation"],
                              axis_sizes=grid.shape)
    return RomModel(basis, coeff_model, shift_map, grid, meta["reference_index"],
                    meta["reference_time"], meta["registration_enabled"], coeffs, shifts,
                    meta["background"], meta["field_name"])
