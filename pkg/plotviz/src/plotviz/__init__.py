"""Renders exported eigenvalue-localization artifacts into figures."""

from .artifacts import (
    FieldData,
    SchemaError,
    read_contours,
    read_disks,
    read_field_csv,
    read_field_json,
    read_markers,
)
from .figure import FigureSpec, load_spec, render

__version__ = "0.1.0"

__all__ = [
    "FieldData",
    "FigureSpec",
    "SchemaError",
    "load_spec",
    "read_contours",
    "read_disks",
    "read_field_csv",
    "read_field_json",
    "read_markers",
    "render",
]
