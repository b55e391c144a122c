"""Readers for the exported artifact formats.

Every reader validates shape and finiteness and raises SchemaError with
the offending path; nothing here recomputes any numerics, the files are
taken as the single source of truth.
"""

import csv
import json

import numpy as np

__all__ = [
    "SchemaError",
    "FieldData",
    "read_field_csv",
    "read_field_json",
    "read_contours",
    "read_disks",
    "read_markers",
]


class SchemaError(ValueError):
    pass


class FieldData:
    """A scalar field on a uniform grid: xs (nx,), ys (ny,), values (ny, nx)."""

    def __init__(self, xs, ys, values):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (self.ys.size, self.xs.size):
            raise SchemaError(
                f"field shape {self.values.shape} does not match axes "
                f"({self.ys.size}, {self.xs.size})"
            )

    @property
    def extent(self):
        """(x0, x1, y0, y1) of the outer cell edges."""
        dx = (self.xs[-1] - self.xs[0]) / max(1, self.xs.size - 1)
        dy = (self.ys[-1] - self.ys[0]) / max(1, self.ys.size - 1)
        return (self.xs[0] - dx / 2, self.xs[-1] + dx / 2,
                self.ys[0] - dy / 2, self.ys[-1] + dy / 2)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON ({e})") from e


def read_field_csv(path):
    """A `re,im,value` table over a full rectangular grid."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["re", "im", "value"]:
        raise SchemaError(f"{path}: expected header re,im,value")
    try:
        data = np.array([[float(c) for c in row] for row in rows[1:]])
    except (ValueError, IndexError) as e:
        raise SchemaError(f"{path}: non-numeric row ({e})") from e
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] == 0:
        raise SchemaError(f"{path}: expected triplet rows")
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    if xs.size * ys.size != data.shape[0]:
        raise SchemaError(f"{path}: rows do not tile a full grid")
    vals = np.full((ys.size, xs.size), np.nan)
    ix = np.searchsorted(xs, data[:, 0])
    iy = np.searchsorted(ys, data[:, 1])
    vals[iy, ix] = data[:, 2]
    return FieldData(xs, ys, vals)


def read_field_json(path):
    """The full-field JSON payload; per-row values reduce to their max."""
    doc = _load_json(path)
    if not isinstance(doc, dict) or "grid" not in doc or "values" not in doc:
        raise SchemaError(f"{path}: expected a field object with grid and values")
    g = doc["grid"]
    try:
        xs = np.linspace(g["re_min"], g["re_max"], int(g["nx"]))
        ys = np.linspace(g["im_min"], g["im_max"], int(g["ny"]))
    except (KeyError, TypeError) as e:
        raise SchemaError(f"{path}: bad grid block ({e})") from e
    raw = doc["values"]

    def denull(x):
        if isinstance(x, list):
            return [denull(v) for v in x]
        return np.nan if x is None else float(x)

    vals = np.asarray(denull(raw), dtype=float)
    if vals.ndim == 3:
        gap = np.all(np.isnan(vals), axis=-1)
        collapsed = np.where(np.isnan(vals), -np.inf, vals).max(axis=-1)
        collapsed[gap] = np.nan
        vals = collapsed
    if vals.shape != (ys.size, xs.size):
        raise SchemaError(f"{path}: values shape {vals.shape} does not match grid")
    mask = doc.get("domain_mask")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != vals.shape:
            raise SchemaError(f"{path}: domain_mask shape mismatch")
        vals = np.where(mask, vals, np.nan)
    return FieldData(xs, ys, vals)


def read_contours(path):
    """A JSON list of closed polylines [[re, im], ...]."""
    doc = _load_json(path)
    if not isinstance(doc, list):
        raise SchemaError(f"{path}: expected a list of polylines")
    loops = []
    for i, loop in enumerate(doc):
        try:
            pts = np.array([complex(p[0], p[1]) for p in loop])
        except (TypeError, IndexError) as e:
            raise SchemaError(f"{path}: loop {i} is not [re, im] pairs") from e
        if pts.size < 3:
            raise SchemaError(f"{path}: loop {i} has fewer than 3 vertices")
        loops.append(pts)
    return loops


def read_disks(path):
    """A JSON list of {center: [re, im], radius, label} records."""
    doc = _load_json(path)
    if isinstance(doc, dict):
        doc = doc.get("disks", doc)
    if not isinstance(doc, list):
        raise SchemaError(f"{path}: expected a list of disk records")
    disks = []
    for i, d in enumerate(doc):
        try:
            center = complex(d["center"][0], d["center"][1])
            radius = float(d["radius"])
        except (TypeError, KeyError, IndexError) as e:
            raise SchemaError(f"{path}: disk {i} missing center/radius") from e
        if not (np.isfinite(radius) and radius >= 0.0):
            raise SchemaError(f"{path}: disk {i} has bad radius {radius}")
        disks.append({"center": center, "radius": radius,
                      "label": str(d.get("label", ""))})
    return disks


def read_markers(path, key="lambda"):
    """Complex marker positions from refinement records, report rows,
    or a bare list of [re, im] pairs."""
    doc = _load_json(path)
    if isinstance(doc, dict):
        doc = doc.get("rows", doc.get("records"))
        if doc is None:
            raise SchemaError(f"{path}: no rows/records list in object")
    if not isinstance(doc, list) or not doc:
        raise SchemaError(f"{path}: expected a non-empty list")
    pts = []
    for i, entry in enumerate(doc):
        if isinstance(entry, dict):
            if key not in entry:
                continue
            entry = entry[key]
        try:
            z = complex(entry[0], entry[1])
        except (TypeError, IndexError) as e:
            raise SchemaError(f"{path}: entry {i} is not an [re, im] pair") from e
        if not np.isfinite(z.real) or not np.isfinite(z.imag):
            raise SchemaError(f"{path}: entry {i} is not finite")
        pts.append(z)
    if not pts:
        raise SchemaError(f"{path}: no entries carry {key!r}")
    return np.array(pts)
