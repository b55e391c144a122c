"""Figure specs and rendering.

A figure spec is a small JSON document naming the artifact files to draw
and how to style them.  Rendering only restyles what the artifacts
already contain; values are never recomputed here.

Spec keys (all layers optional, paths relative to the spec file):

    out       output path, .svg or .png
    title     figure title
    width_px  figure width for svg output (default 720)
    xlim/ylim [lo, hi] axis overrides; default hugs the data
    field     {"path", "kind": "csv"|"json", "scale": "linear"|"log10",
               "levels": [...], "vmin", "vmax"}
    contours  [{"path", "color", "label"}, ...]
    disks     [{"path", "color", "label"}, ...]
    markers   [{"path", "key", "style": "dot"|"star"|"cross",
                "color", "size_px", "label"}, ...]
"""

import dataclasses
import json
import os

import numpy as np

from . import artifacts
from .artifacts import SchemaError
from .svgfig import SvgFigure

__all__ = ["FigureSpec", "load_spec", "render"]

_MPL_MARKERS = {"dot": ".", "star": "*", "cross": "+"}


@dataclasses.dataclass
class FigureSpec:
    out: str
    title: str = None
    width_px: int = 720
    xlim: tuple = None
    ylim: tuple = None
    field: dict = None
    contours: list = dataclasses.field(default_factory=list)
    disks: list = dataclasses.field(default_factory=list)
    markers: list = dataclasses.field(default_factory=list)

    @classmethod
    def from_dict(cls, d, base_dir="."):
        if not isinstance(d, dict):
            raise SchemaError("figure spec must be a JSON object")
        if "out" not in d:
            raise SchemaError("figure spec needs an 'out' path")
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - known
        if extra:
            raise SchemaError(f"unknown spec keys: {sorted(extra)}")
        spec = cls(**d)

        def resolve(p):
            return p if os.path.isabs(p) else os.path.join(base_dir, p)

        spec.out = resolve(spec.out)
        if spec.field:
            spec.field = dict(spec.field, path=resolve(spec.field["path"]))
        for group in (spec.contours, spec.disks, spec.markers):
            for i, layer in enumerate(group):
                if "path" not in layer:
                    raise SchemaError("every layer needs a 'path'")
                group[i] = dict(layer, path=resolve(layer["path"]))
        return spec


def load_spec(path):
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return FigureSpec.from_dict(d, base_dir=os.path.dirname(os.path.abspath(path)))


def _load_field(layer):
    kind = layer.get("kind")
    if kind is None:
        kind = "json" if layer["path"].endswith(".json") else "csv"
    if kind == "csv":
        return artifacts.read_field_csv(layer["path"])
    if kind == "json":
        return artifacts.read_field_json(layer["path"])
    raise SchemaError(f"unknown field kind {kind!r}")


def _load_layers(spec):
    field = _load_field(spec.field) if spec.field else None
    contours = [(artifacts.read_contours(l["path"]), l) for l in spec.contours]
    disks = [(artifacts.read_disks(l["path"]), l) for l in spec.disks]
    markers = [
        (artifacts.read_markers(l["path"], key=l.get("key", "lambda")), l)
        for l in spec.markers
    ]
    return field, contours, disks, markers


def _limits(spec, field, contours, disks, markers):
    if spec.xlim and spec.ylim:
        return tuple(spec.xlim), tuple(spec.ylim)
    xs, ys = [], []
    if field is not None:
        x0, x1, y0, y1 = field.extent
        xs += [x0, x1]
        ys += [y0, y1]
    for loops, _ in contours:
        for loop in loops:
            xs += [loop.real.min(), loop.real.max()]
            ys += [loop.imag.min(), loop.imag.max()]
    for dlist, _ in disks:
        for d in dlist:
            c, r = d["center"], d["radius"]
            xs += [c.real - r, c.real + r]
            ys += [c.imag - r, c.imag + r]
    for pts, _ in markers:
        if len(pts):
            xs += [pts.real.min(), pts.real.max()]
            ys += [pts.imag.min(), pts.imag.max()]
    if not xs:
        raise SchemaError("nothing to draw: spec has no layers")
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    pad = 0.05 * max(x1 - x0, y1 - y0, 1e-6)
    xlim = spec.xlim or (x0 - pad, x1 + pad)
    ylim = spec.ylim or (y0 - pad, y1 + pad)
    return tuple(xlim), tuple(ylim)


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]


def _render_svg(spec, field, contours, disks, markers, xlim, ylim):
    fig = SvgFigure(xlim, ylim, width_px=spec.width_px, title=spec.title)
    if field is not None:
        f = spec.field
        fig.add_raster(field, scale=f.get("scale", "linear"),
                       vmin=f.get("vmin"), vmax=f.get("vmax"),
                       levels=f.get("levels"))
    for i, (loops, layer) in enumerate(contours):
        color = layer.get("color", _PALETTE[i % len(_PALETTE)])
        for j, loop in enumerate(loops):
            fig.add_polyline(loop, color=color,
                             label=layer.get("label") if j == 0 else None)
    for i, (dlist, layer) in enumerate(disks):
        color = layer.get("color", "#cc6600")
        for j, d in enumerate(dlist):
            fig.add_circle(d["center"], d["radius"], color=color,
                           label=layer.get("label") if j == 0 else None)
    for i, (pts, layer) in enumerate(markers):
        fig.add_markers(pts, style=layer.get("style", "dot"),
                        color=layer.get("color", "#000000"),
                        size_px=layer.get("size_px", 5.0),
                        label=layer.get("label"))
    return fig.write(spec.out)


def _render_png(spec, field, contours, disks, markers, xlim, ylim):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Circle

    fig, ax = plt.subplots(figsize=(spec.width_px / 100.0, spec.width_px / 100.0))
    try:
        if field is not None:
            f = spec.field
            vals = np.array(field.values, dtype=float)
            if f.get("scale") == "log10":
                with np.errstate(invalid="ignore", divide="ignore"):
                    vals = np.where(vals > 0.0, np.log10(vals), np.nan)
            im = ax.imshow(vals, origin="lower", extent=field.extent,
                           vmin=f.get("vmin"), vmax=f.get("vmax"),
                           cmap="viridis", interpolation="nearest")
            fig.colorbar(im, ax=ax, shrink=0.8)
        for i, (loops, layer) in enumerate(contours):
            color = layer.get("color", _PALETTE[i % len(_PALETTE)])
            for j, loop in enumerate(loops):
                closed = np.append(loop, loop[0])
                ax.plot(closed.real, closed.imag, color=color, lw=1.2,
                        label=layer.get("label") if j == 0 else None)
        for i, (dlist, layer) in enumerate(disks):
            color = layer.get("color", "#cc6600")
            for j, d in enumerate(dlist):
                ax.add_patch(Circle((d["center"].real, d["center"].imag),
                                    d["radius"], fill=False, ec=color, lw=1.2,
                                    label=layer.get("label") if j == 0 else None))
        for i, (pts, layer) in enumerate(markers):
            ax.plot(pts.real, pts.imag,
                    _MPL_MARKERS[layer.get("style", "dot")],
                    color=layer.get("color", "#000000"), linestyle="none",
                    label=layer.get("label"))
        ax.set_xlim(*xlim)
        ax.set_ylim(*ylim)
        ax.set_aspect("equal")
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        if spec.title:
            ax.set_title(spec.title)
        if ax.get_legend_handles_labels()[1]:
            ax.legend(loc="upper right", fontsize=8)
        fig.savefig(spec.out, dpi=100)
    finally:
        plt.close(fig)
    return spec.out


def render(spec):
    """Render a FigureSpec to its output path; returns the path."""
    field, contours, disks, markers = _load_layers(spec)
    xlim, ylim = _limits(spec, field, contours, disks, markers)
    ext = os.path.splitext(spec.out)[1].lower()
    if ext == ".svg":
        return _render_svg(spec, field, contours, disks, markers, xlim, ylim)
    if ext == ".png":
        return _render_png(spec, field, contours, disks, markers, xlim, ylim)
    raise SchemaError(f"unsupported output format {ext!r} (use .svg or .png)")
