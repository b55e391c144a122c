"""Rectangular grid sampling of inclusion-region indicators, connected
components, and cell-boundary contours.

Three field kinds share one container:

* gershgorin(alpha): per-point margin vector g_j(z) = r_j^alpha c_j^(1-alpha)
  - |d_jj(z)| built from the diagonal split of T; z belongs to the union of
  the row regions iff max_j g_j(z) >= 0.
* sigma_min: smallest singular value of T(z); membership is sigma < eps.
* pert_norm: largest singular value of E(z); membership is value < eps.

Components are 4-connected sets of member cells.  Their boundaries are the
edges of the union of cell squares, traced with the region on the left, so
outer loops run counterclockwise and hole loops clockwise; the polylines sit
half a cell outside the sampled member points.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .errors import DomainError, FlaggedComponent, ParseError

__all__ = [
    "Grid",
    "RegionField",
    "Component",
    "gershgorin_field",
    "sigma_min_field",
    "pert_norm_field",
    "components",
    "extract_contour",
    "export_field_csv",
    "export_field_json",
    "export_contours_json",
]

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid over [re_min, re_max] x [im_min, im_max].

    Points are enumerated row-major: index (iy, ix) is xs[ix] + 1j ys[iy].
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ParseError("grid axes must be strictly increasing")
        if self.nx < 2 or self.ny < 2:
            raise ParseError("grid needs at least 2 points per axis")

    @property
    def xs(self):
        return np.linspace(self.re_min, self.re_max, self.nx)

    @property
    def ys(self):
        return np.linspace(self.im_min, self.im_max, self.ny)

    @property
    def dx(self):
        return (self.re_max - self.re_min) / (self.nx - 1)

    @property
    def dy(self):
        return (self.im_max - self.im_min) / (self.ny - 1)

    def points(self):
        return self.xs[None, :] + 1j * self.ys[:, None]

    def refined(self, factor=2):
        """Same rectangle, factor x the resolution."""
        return replace(
            self, nx=factor * (self.nx - 1) + 1, ny=factor * (self.ny - 1) + 1
        )

    def as_dict(self):
        return {
            "re_min": self.re_min,
            "re_max": self.re_max,
            "im_min": self.im_min,
            "im_max": self.im_max,
            "nx": self.nx,
            "ny": self.ny,
        }


@dataclass
class RegionField:
    grid: Grid
    kind: str  # gershgorin | sigma_min | pert_norm
    values: np.ndarray  # (ny, nx, n) for gershgorin, (ny, nx) otherwise
    domain_mask: np.ndarray  # True where z is in the domain of definition
    alpha: float | None = None

    def union_margin(self):
        """max_j g_j for gershgorin fields, the scalar values otherwise."""
        if self.kind == "gershgorin":
            return np.max(self.values, axis=-1)
        return self.values

    def members(self, eps=None, level=None):
        """Boolean membership per grid point; masked points never belong."""
        with np.errstate(invalid="ignore"):
            if level is not None:
                m = self.union_margin() <= level
            elif self.kind == "gershgorin":
                m = self.union_margin() >= 0.0
            elif self.kind in ("sigma_min", "pert_norm"):
                if eps is None:
                    raise ParseError(f"{self.kind} membership needs eps")
                m = self.values < eps
            else:
                raise ParseError(f"unknown field kind {self.kind!r}")
        m = np.asarray(m)
        m[~self.domain_mask] = False
        # NaN margins (masked or undefined evaluations) never belong
        return m & np.isfinite(self.union_margin())


def _eval_stack(T, grid):
    """Evaluate T on every in-domain grid point.

    Returns (zs, mask, stack) where stack is (n_defined, n, n) aligned with
    zs[mask].
    """
    zs = grid.points()
    mask = T.defined_at(zs)
    stack = T.eval_grid(zs[mask]) if np.any(mask) else np.zeros((0, T.n, T.n), complex)
    return zs, mask, stack


def gershgorin_field(T, grid, alpha=1.0):
    """Per-point generalized Gershgorin margins from T's diagonal split.

    r_j and c_j are full absolute row and column sums of the split's E
    part; functions carrying a custom split (PairSplitFun and other
    diagonal_split overrides) keep their E diagonal in the sums.
    """
    from .matfun import MatFun

    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    n = T.n
    if type(T).diagonal_split is not MatFun.diagonal_split:
        zs = grid.points()
        mask = T.defined_at(zs)
        values = np.full(zs.shape + (n,), np.nan)
        for iy, ix in zip(*np.nonzero(mask)):
            d, e = T.diagonal_split(complex(zs[iy, ix]))
            r = np.sum(np.abs(e), axis=1)
            c = np.sum(np.abs(e), axis=0)
            values[iy, ix] = r**alpha * c ** (1.0 - alpha) - np.abs(d)
        return RegionField(grid=grid, kind="gershgorin", values=values,
                           domain_mask=mask, alpha=alpha)
    zs, mask, stack = _eval_stack(T, grid)
    d = np.einsum("kii->ki", stack.copy())
    offdiag = stack.copy()
    for j in range(n):
        offdiag[:, j, j] = 0.0
    r = np.sum(np.abs(offdiag), axis=2)
    c = np.sum(np.abs(offdiag), axis=1)
    # 0**0 = 1 by numpy convention, which is the right limit for alpha at
    # the endpoints (only the other factor should matter there)
    g = r**alpha * c ** (1.0 - alpha) - np.abs(d)
    values = np.full(zs.shape + (n,), np.nan)
    values[mask] = g
    return RegionField(grid=grid, kind="gershgorin", values=values,
                       domain_mask=mask, alpha=alpha)


def sigma_min_field(T, grid):
    """Smallest singular value of T(z) per grid point."""
    zs, mask, stack = _eval_stack(T, grid)
    values = np.full(zs.shape, np.nan)
    if stack.shape[0]:
        values[mask] = np.linalg.svd(stack, compute_uv=False)[:, -1]
    return RegionField(grid=grid, kind="sigma_min", values=values, domain_mask=mask)


def pert_norm_field(E, grid):
    """Spectral norm of E(z) per grid point."""
    zs, mask, stack = _eval_stack(E, grid)
    values = np.full(zs.shape, np.nan)
    if stack.shape[0]:
        values[mask] = np.linalg.svd(stack, compute_uv=False)[:, 0]
    return RegionField(grid=grid, kind="pert_norm", values=values, domain_mask=mask)


@dataclass
class Component:
    """One 4-connected set of member cells with its traced boundary.

    boundary holds every loop of the cell-union outline: outer loops
    counterclockwise, hole loops clockwise (the region is always on the
    left).  Flagged components carry no boundary.
    """

    grid: Grid
    cells: np.ndarray  # boolean (ny, nx)
    touches_grid_border: bool
    touches_domain_exclusion: bool
    boundary: list = field(default_factory=list)  # loops of complex vertices
    n_T: int | None = None
    n_reference: int | None = None

    @property
    def flagged(self):
        return self.touches_grid_border or self.touches_domain_exclusion

    @property
    def n_cells(self):
        return int(np.count_nonzero(self.cells))

    def cell_points(self):
        return self.grid.points()[self.cells]

    def contains(self, z):
        """Membership of z by nearest-cell lookup (clipped to the grid)."""
        g = self.grid
        ix = int(round((z.real - g.re_min) / g.dx))
        iy = int(round((z.imag - g.im_min) / g.dy))
        if not (0 <= ix < g.nx and 0 <= iy < g.ny):
            return False
        return bool(self.cells[iy, ix])


def components(fld, eps=None, level=None):
    """4-connected components of the field's member mask, flagged and traced."""
    members = fld.members(eps=eps, level=level)
    labels, n_lab = ndimage.label(members, structure=_FOUR_CONN)
    masked = ~fld.domain_mask
    out = []
    for lab in range(1, n_lab + 1):
        cells = labels == lab
        border = bool(
            cells[0, :].any() or cells[-1, :].any()
            or cells[:, 0].any() or cells[:, -1].any()
        )
        # 8-connected dilation: diagonal contact with a masked cell also
        # flags, which keeps traced contours (and their pinch bevels) in Ω
        grown = ndimage.binary_dilation(cells, structure=np.ones((3, 3)))
        excl = bool(np.any(grown & masked))
        comp = Component(
            grid=fld.grid,
            cells=cells,
            touches_grid_border=border,
            touches_domain_exclusion=excl,
        )
        if not comp.flagged:
            comp.boundary = _trace_boundary(cells, fld.grid)
        out.append(comp)
    out.sort(key=lambda c: -c.n_cells)
    return out


# boundary tracing: directed edges along cell-square sides with the member
# cell on the left; S/E/N/W sides of cell (iy, ix) in corner coordinates
# (corner (i, j) sits at xs[ix] - dx/2 + j dx, ys[iy] - dy/2 + i dy)
_SIDES = (
    ((-1, 0), (0, 0), (0, 1)),  # south neighbor absent: corner (0,0) -> (0,1)
    ((0, 1), (0, 1), (1, 1)),   # east: (0,1) -> (1,1)
    ((1, 0), (1, 1), (1, 0)),   # north: (1,1) -> (1,0)
    ((0, -1), (1, 0), (0, 0)),  # west: (1,0) -> (0,0)
)


def _trace_boundary(cells, grid):
    ny, nx = cells.shape
    edges = {}  # start corner -> list of end corners
    for iy, ix in zip(*np.nonzero(cells)):
        for (dy, dx_), (a0, a1), (b0, b1) in _SIDES:
            jy, jx = iy + dy, ix + dx_
            if 0 <= jy < ny and 0 <= jx < nx and cells[jy, jx]:
                continue
            start = (iy + a0, ix + a1)
            end = (iy + b0, ix + b1)
            edges.setdefault(start, []).append(end)

    def turn_left_pick(din, options):
        # pinch corner: two outgoing edges; the left turn keeps hugging the
        # current cell and matches 4-connectivity
        best, best_cross = None, -2
        for end, dout in options:
            cross = din[0] * dout[1] - din[1] * dout[0]
            if cross > best_cross:
                best, best_cross = (end, dout), cross
        return best

    loops = []
    while edges:
        start = next(iter(edges))
        loop = [start]
        cur = start
        din = None
        while True:
            outs = edges[cur]
            if len(outs) == 1 or din is None:
                end = outs.pop(0)
            else:
                opts = [(e, (e[0] - cur[0], e[1] - cur[1])) for e in outs]
                end, _ = turn_left_pick(din, opts)
                outs.remove(end)
            if not outs:
                del edges[cur]
            din = (end[0] - cur[0], end[1] - cur[1])
            loop.append(end)
            cur = end
            if cur == start:
                break
        loops.append(loop)

    x0 = grid.re_min - 0.5 * grid.dx
    y0 = grid.im_min - 0.5 * grid.dy
    out = []
    for loop in loops:
        pts = np.array([complex(x0 + j * grid.dx, y0 + i * grid.dy)
                        for i, j in loop])
        out.append(_bevel_repeats(pts, 0.05 * min(grid.dx, grid.dy)))
    return out


def _bevel_repeats(pts, delta):
    """Chamfer corners a closed loop visits twice so the polygon is simple.

    Each repeat visit of a corner P is replaced by the pair
    (P - delta*din, P + delta*dout), cutting a tiny corner off the adjacent
    cell square; member cell centers stay strictly inside.
    """
    body = pts[:-1]
    vals, counts = np.unique(body, return_counts=True)
    repeats = set(vals[counts > 1])
    if not repeats:
        return pts
    k = len(body)
    new = []
    for i, p in enumerate(body):
        if p in repeats:
            prev_ = body[(i - 1) % k]
            next_ = body[(i + 1) % k]
            din = (p - prev_) / abs(p - prev_)
            dout = (next_ - p) / abs(next_ - p)
            new.append(p - delta * din)
            new.append(p + delta * dout)
        else:
            new.append(p)
    new.append(new[0])
    return np.array(new)


def extract_contour(comp):
    """Outer boundary loop of an unflagged component.

    The polyline is closed (first vertex repeated last), counterclockwise,
    and lies half a cell outside the member points.
    """
    if comp.flagged:
        flags = []
        if comp.touches_grid_border:
            flags.append("touches_grid_border")
        if comp.touches_domain_exclusion:
            flags.append("touches_domain_exclusion")
        raise FlaggedComponent(f"component flagged: {', '.join(flags)}")
    if not comp.boundary:
        comp.boundary = _trace_boundary(comp.cells, comp.grid)

    def signed_area(pts):
        z = pts
        return 0.5 * float(np.sum(z.real[:-1] * z.imag[1:] - z.real[1:] * z.imag[:-1]))

    return max(comp.boundary, key=lambda p: abs(signed_area(p)))


# -- export ---------------------------------------------------------------


def export_field_csv(fld, path):
    """re,im,value rows; value is the union margin (or scalar field)."""
    zs = fld.grid.points()
    vals = fld.union_margin()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "value"])
        for z, v in zip(zs.ravel(), vals.ravel()):
            w.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", f"{v:.17g}"])


def export_field_json(fld, path):
    def scrub(x):
        if isinstance(x, list):
            return [scrub(v) for v in x]
        return float(x) if np.isfinite(x) else None

    payload = {
        "grid": fld.grid.as_dict(),
        "kind": fld.kind,
        "alpha": fld.alpha,
        "domain_mask": fld.domain_mask.astype(int).tolist(),
        "values": scrub(fld.values.tolist()),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def export_contours_json(loops, path):
    """JSON list of closed polylines [[re, im], ...]."""
    data = [[[float(z.real), float(z.imag)] for z in loop] for loop in loops]
    with open(path, "w") as fh:
        json.dump(data, fh)
