"""CSV tables and the JSON model file."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .kernels import KernelSpec
from .solver import FittedSpline
from .transform import RawTable, UnitCubeTransform

MODEL_FORMAT = "sbspline-model"
MODEL_VERSION = 1


class CSVFormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def _fmt(v: float) -> str:
    return repr(float(v))


def read_matrix(path, columns=None) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV with a header row; every field must be present."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CSVFormatError("file is empty", 1) from None
        if columns is not None and header != list(columns):
            raise CSVFormatError(f"expected header {','.join(columns)}, got {','.join(header)}", 1)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) != len(header):
                raise CSVFormatError(f"expected {len(header)} fields, found {len(rec)}", lineno)
            if any(f.strip() == "" for f in rec):
                raise CSVFormatError("missing field", lineno)
            try:
                vals = [float(f) for f in rec]
            except ValueError:
                raise CSVFormatError(f"non-numeric field in {rec!r}", lineno) from None
            rows.append(vals)
    arr = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, arr


def write_matrix(path, header, arr):
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in arr:
            w.writerow([_fmt(v) for v in row])


def point_header(d: int) -> list[str]:
    return [f"x{j + 1}" for j in range(d)]


def read_points(path) -> np.ndarray:
    header, arr = read_matrix(path)
    if header != point_header(len(header)):
        raise CSVFormatError(f"points header must be x1..xd, got {','.join(header)}", 1)
    return arr


def write_points(path, pts):
    pts = np.asarray(pts, dtype=float)
    write_matrix(path, point_header(pts.shape[1]), pts)


def read_table(path) -> RawTable:
    """Data CSV with header ``x1,...,xd,y``."""
    header, arr = read_matrix(path)
    d = len(header) - 1
    if d < 1 or header != point_header(d) + ["y"]:
        raise CSVFormatError(f"data header must be x1,...,xd,y, got {','.join(header)}", 1)
    bad = ~np.isfinite(arr)
    if bad.any():
        i, _ = np.argwhere(bad)[0]
        raise CSVFormatError("non-finite value", int(i) + 2)
    return RawTable(arr[:, :d], arr[:, d])


def write_table(path, raw: RawTable):
    write_matrix(path, point_header(raw.d) + ["y"], np.column_stack([raw.X, raw.Y]))


def write_indices(path, indices):
    with open(path, "w", newline="") as fh:
        fh.write("index\n")
        for i in indices:
            fh.write(f"{int(i)}\n")


def read_indices(path) -> np.ndarray:
    header, arr = read_matrix(path)
    if header != ["index"]:
        raise CSVFormatError("indices header must be 'index'", 1)
    return arr[:, 0].astype(int)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def save_model(path, model: FittedSpline, transform: UnitCubeTransform | None = None):
    diag = {k: _jsonable(v) for k, v in model.diagnostics.items()
            if isinstance(v, (int, float, str, list, np.floating, np.integer, np.ndarray))}
    record = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kernel": {"family": model.spec.family, "d": model.spec.d, "m": model.spec.m},
        "lambda": model.lam,
        "basis": model.basis.tolist(),
        "d_coef": model.d_coef.tolist(),
        "c_coef": model.c_coef.tolist(),
        "diagnostics": diag,
        "transform": None if transform is None else
        {"sorted_columns": [c.tolist() for c in transform.sorted_columns]},
    }
    Path(path).write_text(json.dumps(record))


def load_model(path) -> tuple[FittedSpline, UnitCubeTransform | None]:
    record = json.loads(Path(path).read_text())
    if record.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path} is not a {MODEL_FORMAT} file")
    if record.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {record.get('version')}")
    spec = KernelSpec(record["kernel"]["family"], int(record["kernel"]["d"]))
    model = FittedSpline(
        spec,
        np.array(record["basis"], dtype=float).reshape(-1, spec.d),
        np.array(record["d_coef"], dtype=float),
        np.array(record["c_coef"], dtype=float),
        float(record["lambda"]),
        record.get("diagnostics", {}),
    )
    tr = record.get("transform")
    transform = None if tr is None else UnitCubeTransform([np.array(c, dtype=float) for c in tr["sorted_columns"]])
    return model, transform
