"""A small deterministic SVG backend.

Data elements live in a group whose transform maps the complex plane to
pixels with equal aspect, so marker geometry is written in data units at
full repr precision and round-trips exactly.  No timestamps, no random
ids: the same inputs produce the same bytes.
"""

import base64
import struct
import zlib
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["SvgFigure", "VIRIDIS_ANCHORS"]

# anchor stops of the familiar dark-violet-to-yellow sequential map
VIRIDIS_ANCHORS = np.array([
    (68, 1, 84), (72, 40, 120), (62, 74, 137), (49, 104, 142),
    (38, 130, 142), (31, 158, 137), (53, 183, 121), (109, 205, 89),
    (180, 222, 44), (253, 231, 37),
], dtype=float)


def _colormap(t):
    """t in [0, 1] (any shape) -> uint8 RGB via the anchor table."""
    t = np.asarray(t, dtype=float)
    # gaps get index 0; their pixels are fully transparent anyway
    t = np.clip(np.where(np.isfinite(t), t, 0.0), 0.0, 1.0)
    pos = t * (len(VIRIDIS_ANCHORS) - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, len(VIRIDIS_ANCHORS) - 1)
    frac = (pos - lo)[..., None]
    rgb = VIRIDIS_ANCHORS[lo] * (1.0 - frac) + VIRIDIS_ANCHORS[hi] * frac
    return np.round(rgb).astype(np.uint8)


def _png_bytes(rgba):
    """Encode an (h, w, 4) uint8 array as a PNG, deterministically."""
    h, w = rgba.shape[:2]

    def chunk(tag, data):
        return (struct.pack(">I", len(data)) + tag + data
                + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF))

    raw = b"".join(b"\x00" + rgba[row].tobytes() for row in range(h))
    return (b"\x89PNG\r\n\x1a\n"
            + chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 6, 0, 0, 0))
            + chunk(b"IDAT", zlib.compress(raw, 9))
            + chunk(b"IEND", b""))


def _nice_ticks(lo, hi, target=6):
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10.0 ** np.floor(np.log10(span / target))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if span / (step * mult) <= target:
            step *= mult
            break
    first = np.ceil(lo / step) * step
    ticks = np.arange(first, hi + step * 1e-9, step)
    return [0.0 if abs(t) < step * 1e-9 else float(t) for t in ticks]


def _fmt_tick(t):
    s = f"{t:.6g}"
    return "0" if s == "-0" else s


_MARKER_GEOMETRY = {
    # rays through the origin; symmetric under the y-flip of the data group
    "star": [(1.0, 0.0), (0.5, 0.8660254037844386), (-0.5, 0.8660254037844386)],
    "cross": [(1.0, 0.0), (0.0, 1.0)],
}


class SvgFigure:
    def __init__(self, xlim, ylim, width_px=720, title=None):
        self.x0, self.x1 = map(float, xlim)
        self.y0, self.y1 = map(float, ylim)
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("axis limits must be increasing")
        self.ml, self.mr, self.mt, self.mb = 62.0, 18.0, 30.0, 46.0
        plot_w = width_px - self.ml - self.mr
        self.s = plot_w / (self.x1 - self.x0)
        plot_h = self.s * (self.y1 - self.y0)
        self.width = float(width_px)
        self.height = plot_h + self.mt + self.mb
        self.tx = self.ml - self.s * self.x0
        self.ty = self.mt + self.s * self.y1
        self.title = title
        self._defs = []
        self._raster = []
        self._data = []
        self._legend = []
        self._n_sym = 0

    # pixel-space helpers
    def _px(self, x):
        return self.tx + self.s * x

    def _py(self, y):
        return self.ty - self.s * y

    def add_raster(self, fld, scale="linear", vmin=None, vmax=None, levels=None):
        """Color image of a FieldData under the data layer.

        scale 'log10' maps nonpositive values to blank; levels quantizes
        the normalized value into bands.
        """
        vals = np.array(fld.values, dtype=float)
        if scale == "log10":
            with np.errstate(invalid="ignore", divide="ignore"):
                vals = np.where(vals > 0.0, np.log10(vals), np.nan)
        elif scale != "linear":
            raise ValueError(f"unknown scale {scale!r}")
        finite = np.isfinite(vals)
        if vmin is None:
            vmin = float(np.min(vals[finite])) if finite.any() else 0.0
        if vmax is None:
            vmax = float(np.max(vals[finite])) if finite.any() else 1.0
        if vmax <= vmin:
            vmax = vmin + 1.0
        t = (vals - vmin) / (vmax - vmin)
        if levels:
            edges = np.asarray(sorted(levels), dtype=float)
            t = np.searchsorted(edges, vals) / len(edges)
        rgba = np.zeros(vals.shape + (4,), dtype=np.uint8)
        rgba[..., :3] = _colormap(t)
        rgba[..., 3] = np.where(finite, 255, 0)
        # PNG rows run top-down: flip so the last y-row (largest im) is first
        png = _png_bytes(rgba[::-1])
        x0, x1, y0, y1 = fld.extent
        uri = base64.b64encode(png).decode("ascii")
        self._raster.append(
            f'<image x="{self._px(x0):.3f}" y="{self._py(y1):.3f}" '
            f'width="{self.s * (x1 - x0):.3f}" height="{self.s * (y1 - y0):.3f}" '
            f'preserveAspectRatio="none" style="image-rendering:pixelated" '
            f'href="data:image/png;base64,{uri}"/>'
        )

    def add_polyline(self, points, color="#333333", width=1.2, fill="none",
                     label=None, closed=True):
        pts = np.asarray(points, dtype=complex)
        d = "M " + " L ".join(f"{p.real!r} {p.imag!r}" for p in pts)
        if closed:
            d += " Z"
        self._data.append(
            f'<path d="{d}" fill="{fill}" stroke="{color}" '
            f'stroke-width="{width}" vector-effect="non-scaling-stroke"/>'
        )
        if label:
            self._legend.append((label, color, "line"))

    def add_circle(self, center, radius, color="#cc6600", width=1.2,
                   fill="none", label=None):
        c = complex(center)
        self._data.append(
            f'<circle cx="{c.real!r}" cy="{c.imag!r}" r="{float(radius)!r}" '
            f'fill="{fill}" stroke="{color}" stroke-width="{width}" '
            f'vector-effect="non-scaling-stroke"/>'
        )
        if label:
            self._legend.append((label, color, "line"))

    def add_markers(self, points, style="dot", color="#000000", size_px=5.0,
                    label=None):
        """Markers carry their exact data coordinates in the x/y attributes."""
        r = float(size_px) / self.s
        sym = f"sym{self._n_sym}"
        self._n_sym += 1
        if style == "dot":
            body = f'<circle r="{r!r}" fill="{color}" stroke="none"/>'
        elif style in _MARKER_GEOMETRY:
            rays = "".join(
                f'<line x1="{-r * ux!r}" y1="{-r * uy!r}" '
                f'x2="{r * ux!r}" y2="{r * uy!r}" stroke="{color}" '
                f'stroke-width="1.4" vector-effect="non-scaling-stroke"/>'
                for ux, uy in _MARKER_GEOMETRY[style]
            )
            body = f"<g>{rays}</g>"
        else:
            raise ValueError(f"unknown marker style {style!r}")
        self._defs.append(f'<g id="{sym}">{body}</g>')
        uses = "".join(
            f'<use href="#{sym}" class="marker {style}" '
            f'x="{complex(p).real!r}" y="{complex(p).imag!r}"/>'
            for p in np.asarray(points, dtype=complex)
        )
        self._data.append(uses)
        if label:
            self._legend.append((label, color, style))

    def _axes(self):
        px0, px1 = self.ml, self.width - self.mr
        py0, py1 = self.mt, self.height - self.mb
        out = [f'<rect x="{px0}" y="{py0}" width="{px1 - px0:.3f}" '
               f'height="{py1 - py0:.3f}" fill="none" stroke="#222" '
               f'stroke-width="1"/>']
        for t in _nice_ticks(self.x0, self.x1):
            x = self._px(t)
            out.append(f'<line x1="{x:.3f}" y1="{py1}" x2="{x:.3f}" '
                       f'y2="{py1 + 5:.3f}" stroke="#222" stroke-width="1"/>')
            out.append(f'<text x="{x:.3f}" y="{py1 + 18:.3f}" '
                       f'text-anchor="middle" font-size="11">{_fmt_tick(t)}</text>')
        for t in _nice_ticks(self.y0, self.y1):
            y = self._py(t)
            out.append(f'<line x1="{px0 - 5:.3f}" y1="{y:.3f}" x2="{px0}" '
                       f'y2="{y:.3f}" stroke="#222" stroke-width="1"/>')
            out.append(f'<text x="{px0 - 8:.3f}" y="{y + 3.5:.3f}" '
                       f'text-anchor="end" font-size="11">{_fmt_tick(t)}</text>')
        out.append(f'<text x="{(px0 + px1) / 2:.3f}" y="{py1 + 36:.3f}" '
                   f'text-anchor="middle" font-size="12">Re</text>')
        out.append(f'<text x="{px0 - 48:.3f}" y="{(py0 + py1) / 2:.3f}" '
                   f'text-anchor="middle" font-size="12" '
                   f'transform="rotate(-90 {px0 - 48:.3f} {(py0 + py1) / 2:.3f})"'
                   f'>Im</text>')
        if self.title:
            out.append(f'<text x="{(px0 + px1) / 2:.3f}" y="{py0 - 10:.3f}" '
                       f'text-anchor="middle" font-size="13">'
                       f"{escape(self.title)}</text>")
        if self._legend:
            lx, ly = px1 - 150.0, py0 + 14.0
            for i, (label, color, kind) in enumerate(self._legend):
                y = ly + 16.0 * i
                if kind == "line":
                    swatch = (f'<line x1="{lx}" y1="{y - 4:.3f}" '
                              f'x2="{lx + 18:.3f}" y2="{y - 4:.3f}" '
                              f'stroke="{color}" stroke-width="2"/>')
                else:
                    swatch = (f'<rect x="{lx + 5:.3f}" y="{y - 9:.3f}" '
                              f'width="9" height="9" fill="{color}"/>')
                out.append(swatch)
                out.append(f'<text x="{lx + 24:.3f}" y="{y:.3f}" '
                           f'font-size="11">{escape(label)}</text>')
        return out

    def write(self, path):
        clip = (f'<clipPath id="plot"><rect x="{self.ml}" y="{self.mt}" '
                f'width="{self.width - self.ml - self.mr:.3f}" '
                f'height="{self.height - self.mt - self.mb:.3f}"/></clipPath>')
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'xmlns:xlink="http://www.w3.org/1999/xlink" '
            f'width="{self.width:.0f}" height="{self.height:.0f}" '
            f'viewBox="0 0 {self.width:.0f} {self.height:.0f}" '
            f'font-family="sans-serif">',
            f"<defs>{clip}{''.join(self._defs)}</defs>",
            f'<rect width="{self.width:.0f}" height="{self.height:.0f}" '
            f'fill="#ffffff"/>',
            f'<g clip-path="url(#plot)">{"".join(self._raster)}',
            f'<g transform="translate({self.tx!r} {self.ty!r}) '
            f'scale({self.s!r} {-self.s!r})">{"".join(self._data)}</g></g>',
            *self._axes(),
            "</svg>",
        ]
        data = "\n".join(parts)
        with open(path, "w") as fh:
            fh.write(data)
        return path
