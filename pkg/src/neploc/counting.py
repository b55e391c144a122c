"""Eigenvalue counting inside closed contours.

Two independent routes to the winding number of det T around a contour:

* count_arg_det: accumulate the phase of det T(z) along the polyline,
  bisecting segments until every phase step is below pi/2;
* count_trace: Gauss-Legendre quadrature of (1/2 pi i) tr(T^{-1} T') dz.

Both record the smallest sigma_min(T) seen on the contour, so every count
doubles as a certificate that the contour stayed clear of the spectrum.
homotopy_guard checks the hypothesis that lets a count for a reference
function (diagonal part, linearization, ...) transfer to the full one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    FlaggedComponent,
    GuardFailed,
    NoConvergence,
    NumericalError,
    ParseError,
    SingularOnContour,
)
from .matfun import difference

__all__ = [
    "Contour",
    "CountCertificate",
    "GuardResult",
    "count_arg_det",
    "count_trace",
    "homotopy_guard",
    "certify_component",
]

# ratio sigma_min/sigma_max below which T counts as singular on the contour
_SING_RTOL = 1e-13


def _signed_area(z):
    return 0.5 * float(np.sum(z.real[:-1] * z.imag[1:] - z.real[1:] * z.imag[:-1]))


def _segments_intersect(p1, p2, q1, q2):
    """Proper crossing test for open segments (shared endpoints excluded)."""

    def orient(a, b, c):
        return np.sign((b.real - a.real) * (c.imag - a.imag)
                       - (b.imag - a.imag) * (c.real - a.real))

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


@dataclass(frozen=True)
class Contour:
    """Simple closed polyline, stored with the first vertex repeated last.

    orientation is +1 for counterclockwise loops, -1 for clockwise (hole
    loops of an annular component keep their clockwise sense).
    """

    vertices: np.ndarray
    orientation: int

    @staticmethod
    def from_vertices(vertices, check_simple=True):
        z = np.asarray(vertices, dtype=complex).ravel()
        if z.size < 4:
            raise ParseError("a closed contour needs at least 3 distinct vertices")
        if z[0] != z[-1]:
            z = np.append(z, z[0])
        area = _signed_area(z)
        if area == 0.0:
            raise ParseError("degenerate contour with zero area")
        if check_simple:
            Contour._check_simple(z)
        return Contour(vertices=z, orientation=+1 if area > 0 else -1)

    @staticmethod
    def _check_simple(z):
        k = len(z) - 1
        for i in range(k):
            p1, p2 = z[i], z[i + 1]
            # skip the two neighbours sharing an endpoint with segment i
            js = range(i + 2, k if i > 0 else k - 1)
            for j in js:
                if _segments_intersect(p1, p2, z[j], z[j + 1]):
                    raise ParseError(
                        f"contour self-intersects between segments {i} and {j}"
                    )

    @staticmethod
    def circle(center, radius, n=64):
        t = np.linspace(0.0, 2.0 * np.pi, n + 1)
        return Contour.from_vertices(center + radius * np.exp(1j * t),
                                     check_simple=False)

    @staticmethod
    def ellipse(center, a, b, n=128, angle=0.0):
        """Half-axes a (re) and b (im), optionally rotated by angle."""
        t = np.linspace(0.0, 2.0 * np.pi, n + 1)
        w = a * np.cos(t) + 1j * b * np.sin(t)
        return Contour.from_vertices(center + w * np.exp(1j * angle),
                                     check_simple=False)

    @staticmethod
    def rectangle(re0, re1, im0, im1):
        if not (re0 < re1 and im0 < im1):
            raise ParseError("rectangle corners must be ordered")
        vs = [re0 + 1j * im0, re1 + 1j * im0, re1 + 1j * im1, re0 + 1j * im1]
        return Contour.from_vertices(vs, check_simple=False)

    def points(self):
        return self.vertices

    def contains(self, z):
        """Winding-number point-in-polygon test."""
        v = self.vertices
        w = np.sum(np.angle((v[1:] - z) / (v[:-1] - z)))
        return abs(w) > np.pi  # 0 outside, +-2 pi inside


@dataclass(frozen=True)
class CountCertificate:
    """A certified eigenvalue count.

    residual is the method's own quality number: |raw - round(raw)| for the
    trace quadrature, the largest per-segment phase step for the argument
    method.  min_margin is the smallest sigma_min(T(z)) met on the contour.
    """

    count: int
    method: str
    min_margin: float
    residual: float
    n_evals: int = 0
    contour_id: str = ""

    def as_dict(self):
        return {
            "count": self.count,
            "method": self.method,
            "min_margin": self.min_margin,
            "residual": self.residual,
            "contour_id": self.contour_id,
        }


class _DetCache:
    """Phase, log|det| and sigma_min of T at contour points, memoized."""

    def __init__(self, T):
        self.T = T
        self.cache = {}
        self.min_sigma = np.inf
        self.n_evals = 0

    def at(self, z):
        z = complex(z)
        hit = self.cache.get(z)
        if hit is not None:
            return hit
        a = self.T.eval(z)
        sv = np.linalg.svd(a, compute_uv=False)
        smin, smax = float(sv[-1]), float(sv[0])
        if smax == 0.0 or smin <= _SING_RTOL * smax:
            raise SingularOnContour(
                f"T is numerically singular on the contour at z={z} "
                f"(sigma_min={smin:.3e})"
            )
        self.min_sigma = min(self.min_sigma, smin)
        self.n_evals += 1
        sign, logabs = np.linalg.slogdet(a)
        val = (float(np.angle(sign)), float(logabs))
        self.cache[z] = val
        return val


def _wrap(dphi):
    return (dphi + np.pi) % (2.0 * np.pi) - np.pi


def _winding_arg(T, vertices, max_depth=40):
    """Raw winding number of det T along a closed polyline.

    Returns (raw winding, min sigma, max phase step, evaluations).
    """
    cache = _DetCache(T)
    total = 0.0
    max_step = 0.0
    for a, b in zip(vertices[:-1], vertices[1:]):
        if a == b:
            continue
        stack = [(a, b, 0)]
        while stack:
            za, zb, depth = stack.pop()
            pa = cache.at(za)[0]
            pb = cache.at(zb)[0]
            step = _wrap(pb - pa)
            if abs(step) < 0.5 * np.pi:
                total += step
                max_step = max(max_step, abs(step))
                continue
            if depth >= max_depth:
                raise NoConvergence(
                    f"phase step {step:.3f} not resolved after {max_depth} "
                    f"bisections near z={0.5 * (za + zb)}"
                )
            zm = 0.5 * (za + zb)
            stack.append((zm, zb, depth + 1))
            stack.append((za, zm, depth + 1))
    return total / (2.0 * np.pi), cache.min_sigma, max_step, cache.n_evals


def count_arg_det(T, contour, max_depth=40, contour_id=""):
    """Eigenvalues inside a counterclockwise contour, by argument accumulation."""
    raw, min_sigma, max_step, n_evals = _winding_arg(
        T, contour.vertices, max_depth=max_depth
    )
    raw *= contour.orientation
    count = int(round(raw))
    if abs(raw - count) > 0.05:
        raise NoConvergence(
            f"accumulated winding {raw:.6f} is not close to an integer"
        )
    if count < 0:
        raise NumericalError(
            f"negative winding count {count}; det T is analytic inside the "
            "contour, so the contour or domain is suspect"
        )
    return CountCertificate(
        count=count,
        method="arg_det",
        min_margin=min_sigma,
        residual=max_step,
        n_evals=n_evals,
        contour_id=contour_id,
    )


def _gauss_nodes(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w  # mapped to [0, 1]


def _trace_raw(T, vertices, panels, order):
    """(1/2 pi i) integral of tr(T^{-1} T') along the polyline."""
    x01, w01 = _gauss_nodes(order)
    total = 0.0 + 0.0j
    min_sigma = np.inf
    n_evals = 0
    segs = list(zip(vertices[:-1], vertices[1:]))
    for a, b in segs:
        if a == b:
            continue
        for p in range(panels):
            za = a + (b - a) * p / panels
            zb = a + (b - a) * (p + 1) / panels
            dz = zb - za
            for x, w in zip(x01, w01):
                z = za + x * dz
                tz = T.eval(z)
                sv = np.linalg.svd(tz, compute_uv=False)
                if sv[-1] <= _SING_RTOL * sv[0]:
                    raise SingularOnContour(
                        f"T is numerically singular on the contour at z={z}"
                    )
                min_sigma = min(min_sigma, float(sv[-1]))
                tp = T.eval_deriv(z)
                total += w * dz * np.trace(np.linalg.solve(tz, tp))
                n_evals += 1
    return total / (2.0j * np.pi), min_sigma, n_evals


def count_trace(T, contour, panels=4, order=10, max_doublings=5, contour_id=""):
    """Eigenvalues inside a contour by trace quadrature of T^{-1} T'."""
    n_evals = 0
    raw = None
    for _ in range(max_doublings + 1):
        raw, min_sigma, ne = _trace_raw(T, contour.vertices, panels, order)
        raw *= contour.orientation
        n_evals += ne
        count = int(round(raw.real))
        residual = abs(raw - count)
        if residual < 0.1:
            if count < 0:
                raise NumericalError(f"negative winding count {count}")
            return CountCertificate(
                count=count,
                method="trace_quadrature",
                min_margin=min_sigma,
                residual=float(residual),
                n_evals=n_evals,
                contour_id=contour_id,
            )
        panels *= 2
    raise NoConvergence(
        f"trace quadrature residual {abs(raw - round(raw.real)):.3f} "
        f"after doubling to {panels} panels"
    )


@dataclass(frozen=True)
class GuardResult:
    ok: bool
    min_margin: float
    s_worst: float
    z_worst: complex

    def __bool__(self):
        return self.ok


def homotopy_guard(D, E, contour, s_samples=11, margin_tol=0.0):
    """Check D(z) + s E(z) stays nonsingular on the contour for s in [0, 1].

    Samples s on a uniform grid including both endpoints, and z over the
    contour vertices.  Heuristic sampling certificate: returns the smallest
    singular value seen and where it occurred, never raises.
    """
    if s_samples < 2:
        raise ParseError("need at least the two endpoint s-samples")
    zs = contour.vertices[:-1] if hasattr(contour, "vertices") else np.asarray(contour)
    svals = np.linspace(0.0, 1.0, s_samples)
    worst = (np.inf, 0.0, 0.0 + 0.0j)
    for z in zs:
        dz = D.eval(z)
        ez = E.eval(z)
        for s in svals:
            smin = float(np.linalg.svd(dz + s * ez, compute_uv=False)[-1])
            if smin < worst[0]:
                worst = (smin, float(s), complex(z))
    ok = worst[0] > margin_tol
    return GuardResult(ok=ok, min_margin=worst[0], s_worst=worst[1],
                       z_worst=worst[2])


def _component_cycle_count(T, loops, max_depth=40):
    """Summed raw winding over all boundary loops (holes count negatively)."""
    total = 0.0
    min_sigma = np.inf
    max_step = 0.0
    n_evals = 0
    for loop in loops:
        raw, ms, step, ne = _winding_arg(T, loop, max_depth=max_depth)
        total += raw
        min_sigma = min(min_sigma, ms)
        max_step = max(max_step, step)
        n_evals += ne
    count = int(round(total))
    if abs(total - count) > 0.05:
        raise NoConvergence(f"cycle winding {total:.6f} is not close to an integer")
    if count < 0:
        raise NumericalError(f"negative cycle count {count}")
    return count, min_sigma, max_step, n_evals


def certify_component(T, reference, comp, s_samples=11, contour_id=""):
    """Count eigenvalues of T and of a reference function inside a component.

    The homotopy guard runs first for the pair (reference, T - reference);
    with the guard green both counts are taken over the full boundary cycle
    of the component.  The theorems assert the two counts agree; this
    operation reports them, it does not assume.
    """
    if comp.flagged:
        raise FlaggedComponent("cannot certify a flagged component")
    loops = comp.boundary
    if not loops:
        raise FlaggedComponent("component has no traced boundary")
    E = difference(T, reference)
    all_vertices = np.concatenate([lp[:-1] for lp in loops])
    guard = homotopy_guard(reference, E, all_vertices, s_samples=s_samples)
    if not guard.ok:
        raise GuardFailed(
            f"homotopy guard failed: sigma_min={guard.min_margin:.3e} at "
            f"s={guard.s_worst}, z={guard.z_worst}"
        )
    n_T, ms_T, step_T, ne_T = _component_cycle_count(T, loops)
    n_ref, ms_R, step_R, ne_R = _component_cycle_count(reference, loops)
    certs = {
        "T": CountCertificate(n_T, "arg_det", ms_T, step_T, ne_T, contour_id),
        "reference": CountCertificate(n_ref, "arg_det", ms_R, step_R, ne_R,
                                      contour_id),
        "guard": guard,
    }
    comp.n_T = n_T
    comp.n_reference = n_ref
    return n_T, n_ref, certs
