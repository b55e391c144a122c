"""Chebyshev interpolation on a real interval, colleague-matrix
linearization, and the eps-dependent Gershgorin disks that transfer the
colleague spectrum to the nonlinear problem.

The interpolant lives in the rescaled variable x in [-1, 1] with
z = mid + h x, h the half-width.  Colleague eigenvalues and perturbation
radii are computed in x and mapped back; distances scale by h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import matrix_balance

from .errors import (
    DefectiveColleague,
    DomainError,
    IllConditionedLeadingCoeff,
)
from .linear_compare import Disk, count_in_disk_union
from .matfun import Domain, LambdaMatFun, MatFun, ScalarTerm
from .region_grid import RegionField

__all__ = [
    "ChebApprox",
    "ColleagueSystem",
    "cheb_interp",
    "colleague",
    "eps_disks",
    "interval_from_gershgorin",
]


def _cheb_nodes(degree):
    # second-kind points, x_0 = 1 down to x_degree = -1
    return np.cos(np.pi * np.arange(degree + 1) / degree)


def _cosine_coeffs(samples):
    """First-kind coefficients from samples at the second-kind points.

    samples has shape (degree+1, ...); returns the same shape.  Plain
    O(n^2) cosine sums with the end terms halved, and the j = 0, degree
    coefficients halved once more.
    """
    deg = samples.shape[0] - 1
    k = np.arange(deg + 1)
    weights = np.ones(deg + 1)
    weights[0] = weights[-1] = 0.5
    cos_table = np.cos(np.pi * np.outer(k, k) / deg)
    flat = samples.reshape(deg + 1, -1)
    coeffs = (2.0 / deg) * (cos_table * weights[None, :]) @ flat
    coeffs[0] *= 0.5
    coeffs[-1] *= 0.5
    return coeffs.reshape(samples.shape)


def _clenshaw(coeffs, x):
    """Evaluate sum_j coeffs[j] T_j(x) for scalar or array x.

    coeffs has shape (deg+1, n, n); x broadcasts to shape (...,); result
    has shape x.shape + (n, n).
    """
    x = np.asarray(x, dtype=complex)
    b1 = np.zeros(x.shape + coeffs.shape[1:], dtype=complex)
    b2 = np.zeros_like(b1)
    two_x = (2.0 * x)[..., None, None]
    for a in coeffs[:0:-1]:
        b1, b2 = a + two_x * b1 - b2, b1
    return coeffs[0] + x[..., None, None] * b1 - b2


def _cheb_deriv_coeffs(coeffs):
    """Chebyshev coefficients of the derivative (same basis, degree - 1)."""
    deg = coeffs.shape[0] - 1
    if deg == 0:
        return np.zeros((1,) + coeffs.shape[1:], dtype=complex)
    out = np.zeros((deg,) + coeffs.shape[1:], dtype=complex)
    out[deg - 1] = 2.0 * deg * coeffs[deg]
    for j in range(deg - 1, 0, -1):
        prev = out[j + 1] if j + 1 < deg else 0.0
        out[j - 1] = prev + 2.0 * j * coeffs[j]
    out[0] *= 0.5
    return out


@dataclass(frozen=True)
class ChebApprox:
    """Matrix polynomial Q(x) = sum_j A_j T_j(x) interpolating f on [z_min, z_max]."""

    z_min: float
    z_max: float
    degree: int
    coeffs: np.ndarray  # (degree+1, n, n)
    node_residual: float  # max relative mismatch at the sample nodes

    @property
    def size(self):
        return self.coeffs.shape[1]

    @property
    def mid(self):
        return 0.5 * (self.z_min + self.z_max)

    @property
    def half_width(self):
        return 0.5 * (self.z_max - self.z_min)

    def x_of_z(self, z):
        return (np.asarray(z, dtype=complex) - self.mid) / self.half_width

    def z_of_x(self, x):
        return self.mid + self.half_width * np.asarray(x, dtype=complex)

    def eval_x(self, x):
        return _clenshaw(self.coeffs, x)

    def eval_z(self, z):
        return _clenshaw(self.coeffs, self.x_of_z(z))

    def deriv_z(self, z):
        dcoef = _cheb_deriv_coeffs(self.coeffs)
        return _clenshaw(dcoef, self.x_of_z(z)) / self.half_width

    def as_matfun(self, name="cheb"):
        dcoef = _cheb_deriv_coeffs(self.coeffs)
        h = self.half_width

        def fun(z):
            return _clenshaw(self.coeffs, self.x_of_z(z))

        def dfun(z):
            return _clenshaw(dcoef, self.x_of_z(z)) / h

        return LambdaMatFun(self.size, fun, dfun,
                            domain=Domain.whole_plane(), name=name)

    def as_dict(self):
        return {
            "z_min": self.z_min,
            "z_max": self.z_max,
            "degree": self.degree,
            "coeffs": [
                [[[v.real, v.imag] for v in row] for row in a] for a in self.coeffs
            ],
        }


def cheb_interp(f, interval, degree):
    """Interpolate f through degree+1 Chebyshev points of the second kind.

    f may be a ScalarTerm, a MatFun, or a plain callable returning scalars
    or square matrices.
    """
    z_min, z_max = float(interval[0]), float(interval[1])
    if not z_min < z_max:
        raise DomainError(f"degenerate interval [{z_min}, {z_max}]")
    degree = int(degree)
    if degree < 1:
        raise DomainError("interpolation degree must be >= 1")
    xs = _cheb_nodes(degree)
    zs = 0.5 * (z_min + z_max) + 0.5 * (z_max - z_min) * xs

    if isinstance(f, ScalarTerm):
        samples = f.eval(zs)[:, None, None]
    elif isinstance(f, MatFun):
        samples = f.eval_grid(zs)
    else:
        vals = [np.asarray(f(complex(z)), dtype=complex) for z in zs]
        samples = np.stack([v.reshape(1, 1) if v.ndim == 0 else v for v in vals])
    samples = np.asarray(samples, dtype=complex)
    coeffs = _cosine_coeffs(samples)
    recon = _clenshaw(coeffs, xs)
    scale = max(float(np.max(np.abs(samples))), 1e-300)
    resid = float(np.max(np.abs(recon - samples))) / scale
    return ChebApprox(z_min=z_min, z_max=z_max, degree=degree,
                      coeffs=coeffs, node_residual=resid)


@dataclass(frozen=True)
class ColleagueSystem:
    """Colleague linearization of a ChebApprox, diagonalized after balancing.

    eigenvalues_x are the colleague eigenvalues in the rescaled variable;
    rho[j] is the absolute row sum of S^{-1} E0 S, the structured
    perturbation direction whose (last, first) block holds A_n^{-1} B / 2.
    det(A_n^{-1} Q(x)) = 2^{(deg-1) n} det(xI - C).
    """

    approx: ChebApprox
    C: np.ndarray
    S: np.ndarray
    eigenvalues_x: np.ndarray
    rho: np.ndarray
    cond_leading: float
    diag_residual: float
    row_sums: bool = True

    @property
    def eigenvalues_z(self):
        return self.approx.z_of_x(self.eigenvalues_x)

    def disks_z(self, eps):
        """Gershgorin disks in z-coordinates for remainder level eps.

        x-distances scale by the interval half-width under z = mid + h x.
        """
        h = self.approx.half_width
        return [
            Disk(center=complex(z), radius=float(eps * r * h), label=f"colleague {j}")
            for j, (z, r) in enumerate(zip(self.eigenvalues_z, self.rho))
        ]


def colleague(ch, B_coeff=None, row_sums=True):
    """Build and diagonalize the colleague matrix of a ChebApprox.

    B_coeff is the constant matrix multiplying the scalar interpolation
    remainder in the target function (identity when omitted); it only
    enters the perturbation radii rho, not C itself.
    """
    deg, sz = ch.degree, ch.size
    An = ch.coeffs[-1]
    # a leading coefficient that is tiny next to the others is as bad as an
    # ill-conditioned one: inverting it scales roundoff into the last block
    scale = max(float(np.linalg.norm(a)) for a in ch.coeffs)
    lead = float(np.linalg.norm(An))
    if lead <= 1e-12 * scale:
        raise IllConditionedLeadingCoeff(
            f"leading Chebyshev coefficient norm {lead:.2e} is negligible "
            f"against the coefficient scale {scale:.2e}"
        )
    cond = float(np.linalg.cond(An))
    if not np.isfinite(cond) or cond > 1e12:
        raise IllConditionedLeadingCoeff(
            f"leading Chebyshev coefficient has condition {cond:.2e}"
        )
    if B_coeff is None:
        B_coeff = np.eye(sz)
    B_coeff = np.asarray(B_coeff, dtype=complex)
    Ainv = np.linalg.inv(An)

    if deg == 1:
        C = -Ainv @ ch.coeffs[0]
    else:
        C = np.zeros((deg * sz, deg * sz), dtype=complex)
        eye = np.eye(sz)
        C[0:sz, sz : 2 * sz] = eye  # first row: (1/2) * 2I
        for i in range(1, deg):
            r0 = i * sz
            C[r0 : r0 + sz, r0 - sz : r0] = 0.5 * eye
            if i + 1 < deg:
                C[r0 : r0 + sz, r0 + sz : r0 + 2 * sz] = 0.5 * eye
        last = (deg - 1) * sz
        for j in range(deg):
            C[last : last + sz, j * sz : (j + 1) * sz] -= 0.5 * Ainv @ ch.coeffs[j]

    Cb, Tb = matrix_balance(C)
    lam, Vb = np.linalg.eig(Cb)
    S = Tb @ Vb
    try:
        Sinv = np.linalg.inv(S)
    except np.linalg.LinAlgError:
        raise DefectiveColleague("colleague eigenvector matrix singular")
    resid = float(
        np.linalg.norm(Sinv @ C @ S - np.diag(lam)) / max(np.linalg.norm(C), 1e-300)
    )
    if resid > 1e-8 or not np.all(np.isfinite(Sinv)):
        raise DefectiveColleague(
            f"colleague diagonalization residual {resid:.2e} exceeds 1e-8"
        )

    E0 = np.zeros_like(C)
    # degree 1 has no halved last block row; the remainder enters with
    # weight 1 there, with 1/2 otherwise
    E0[-sz:, 0:sz] = (1.0 if deg == 1 else 0.5) * Ainv @ B_coeff
    SES = Sinv @ E0 @ S
    axis = 1 if row_sums else 0
    rho = np.sum(np.abs(SES), axis=axis)
    return ColleagueSystem(
        approx=ch,
        C=C,
        S=S,
        eigenvalues_x=lam,
        rho=rho,
        cond_leading=cond,
        diag_residual=resid,
        row_sums=row_sums,
    )


def remainder_field(exact_scalar, ch, grid):
    """|exact(z) - q(z)| sampled over the grid (pert_norm-style field)."""

    zs = grid.points()
    mask = exact_scalar.defined_at(zs)
    vals = np.full(zs.shape, np.nan)
    q = _clenshaw(ch.coeffs, ch.x_of_z(zs[mask]))[..., 0, 0]
    vals[mask] = np.abs(exact_scalar.eval(zs[mask]) - q)
    return RegionField(grid=grid, kind="pert_norm", values=vals, domain_mask=mask)


def eps_disks(cs, scalar_ch, exact_scalar, eps, grid, T=None, n_boundary=64):
    """Remainder field, mapped disks, and certified counts at level eps.

    scalar_ch is the scalar interpolant whose remainder r = exact - q is the
    perturbation level; cs may come from a matrix interpolant on the same
    interval.  A disk is certifiable when |r| < eps on its whole closure
    (checked by the maximum principle on n_boundary boundary samples).
    When T is given, certified disk clusters get argument-principle counts
    for both T and the interpolant behind cs.
    """
    eps = float(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    field = remainder_field(exact_scalar, scalar_ch, grid)
    disks = cs.disks_z(eps)

    qfun = cs.approx.as_matfun()
    theta = np.exp(2j * np.pi * np.arange(n_boundary) / n_boundary)

    def inside_omega_eps(d):
        ring = d.center + d.radius * theta
        if not np.all(exact_scalar.defined_at(ring)):
            return False
        rr = np.abs(
            exact_scalar.eval(ring)
            - _clenshaw(scalar_ch.coeffs, scalar_ch.x_of_z(ring))[..., 0, 0]
        )
        return bool(np.all(rr < eps))

    certified = [d for d in disks if inside_omega_eps(d)]
    counts = []
    if T is not None and certified:
        counts = count_in_disk_union(T, certified, reference=qfun)
    return field, disks, certified, counts


def interval_from_gershgorin(T, re_lo, re_hi, n=2001, alpha=1.0, pad=0.05):
    """Real-axis extent of the alpha-Gershgorin union, padded.

    Scans the real segment [re_lo, re_hi]; the returned interval brackets
    every real point whose union margin is nonnegative.
    """
    xs = np.linspace(re_lo, re_hi, n)
    member = np.zeros(n, dtype=bool)
    for i, x in enumerate(xs):
        z = complex(x)
        if not T.defined_at(z):
            continue
        d, e = T.diagonal_split(z)
        r = np.sum(np.abs(e), axis=1)
        c = np.sum(np.abs(e), axis=0)
        g = r**alpha * c ** (1.0 - alpha) - np.abs(d)
        member[i] = bool(np.max(g) >= 0.0)
    if not member.any():
        raise DomainError("Gershgorin union does not meet the real segment")
    lo, hi = xs[member][0], xs[member][-1]
    width = hi - lo
    if width == 0.0:
        width = (re_hi - re_lo) / n
    return float(lo - pad * width), float(hi + pad * width)
