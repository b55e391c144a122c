"""Comparisons against linear pencils: pencil pseudospectra, uniform
Gershgorin disks from caller-supplied sup-bounds, and the nonlinear
Bauer-Fike disks built on a diagonalizing eigenbasis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counting import Contour, count_arg_det
from .errors import DefectiveMatrix, DomainError, SingularPencil
from .region_grid import RegionField

__all__ = [
    "Disk",
    "EigenBasis",
    "pencil_pseudospectrum_field",
    "uniform_gershgorin_disks",
    "bauer_fike_disks",
    "eigenbasis",
    "cluster_disks",
    "count_in_disk_union",
]


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float
    label: str = ""

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius >= 0.0):
            raise DomainError(f"disk radius must be finite and >= 0, got {self.radius}")

    def contains(self, z):
        return abs(z - self.center) <= self.radius

    def overlaps(self, other):
        return abs(self.center - other.center) <= self.radius + other.radius

    def as_dict(self):
        return {
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
            "label": self.label,
        }


@dataclass(frozen=True)
class EigenBasis:
    """Eigentriples of a matrix with unit-norm right eigenvectors.

    Rows of W are the left eigenvectors w_i* = e_i* V^{-1} under that
    normalization, so w_i* v_j = delta_ij and sec(theta_i) = ||w_i||.
    """

    eigenvalues: np.ndarray
    V: np.ndarray
    W: np.ndarray

    @property
    def secants(self):
        return np.linalg.norm(self.W, axis=1)


def eigenbasis(A):
    """Diagonalize A with unit 2-norm eigenvector columns."""
    A = np.asarray(A, dtype=complex)
    lam, V = np.linalg.eig(A)
    V = V / np.linalg.norm(V, axis=0)
    # w_i* v_i = 1 requires V invertible; with unit columns a collapsed
    # eigenbasis shows up directly as a tiny smallest singular value
    smin = np.linalg.svd(V, compute_uv=False)[-1]
    if smin <= 1e3 * np.finfo(float).eps:
        raise DefectiveMatrix(
            f"eigenvector matrix is numerically singular (sigma_min {smin:.2e})"
        )
    try:
        W = np.linalg.inv(V)
    except np.linalg.LinAlgError:
        raise DefectiveMatrix("eigenvector matrix is singular")
    resid = np.linalg.norm(W @ A @ V - np.diag(lam)) / max(np.linalg.norm(A), 1e-300)
    if resid > 1e-10 or not np.all(np.isfinite(W)):
        raise DefectiveMatrix(
            f"eigenbasis residual {resid:.2e}; matrix too close to defective"
        )
    return EigenBasis(eigenvalues=lam, V=V, W=W)


def pencil_pseudospectrum_field(A, B, grid):
    """sigma_min(A - zB) sampled over the grid."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    if A.shape != B.shape or A.shape != (n, n):
        raise DomainError("A and B must be square and of equal size")
    rng = np.random.default_rng(12345)
    probes = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
    if all(abs(np.linalg.det(A - z * B)) < 1e-300 for z in probes):
        raise SingularPencil("det(A - zB) vanishes identically")
    zs = grid.points()
    stack = A[None, :, :] - zs.ravel()[:, None, None] * B[None, :, :]
    values = np.linalg.svd(stack, compute_uv=False)[:, -1].reshape(zs.shape)
    return RegionField(
        grid=grid,
        kind="sigma_min",
        values=values,
        domain_mask=np.ones(zs.shape, dtype=bool),
    )


def uniform_gershgorin_disks(d, r, c, alpha=1.0):
    """Disks B(d_i, r_i^alpha c_i^(1-alpha)) from uniform off-diagonal bounds.

    The caller supplies r_i and c_i, typically sup over the region of the
    absolute row and column sums of the off-diagonal part.
    """
    d = np.asarray(d, dtype=complex).ravel()
    r = np.asarray(r, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if not (len(d) == len(r) == len(c)):
        raise DomainError("d, r, c must have equal length")
    if np.any(r < 0) or np.any(c < 0):
        raise DomainError("row and column bounds must be nonnegative")
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    rho = r**alpha * c ** (1.0 - alpha)
    return [
        Disk(center=complex(di), radius=float(pi), label=f"row {i}")
        for i, (di, pi) in enumerate(zip(d, rho))
    ]


def bauer_fike_disks(A, F):
    """Disks B(lambda_i, n ||F||_2 sec(theta_i)) for perturbations |E(z)| <= F.

    Every eigenvalue of A + E(z) with E bounded entrywise by F lies in the
    union of these disks, by a row-sum bound on V^{-1} E V.
    """
    A = np.asarray(A, dtype=complex)
    F = np.asarray(F, dtype=float)
    if np.any(F < 0):
        raise DomainError("F must be entrywise nonnegative")
    n = A.shape[0]
    basis = eigenbasis(A)
    fnorm = float(np.linalg.norm(F, 2))
    radii = n * fnorm * basis.secants
    return [
        Disk(center=complex(lam), radius=float(rad), label=f"eig {i}")
        for i, (lam, rad) in enumerate(zip(basis.eigenvalues, radii))
    ]


def cluster_disks(disks):
    """Group disks into connected overlap clusters (union-find)."""
    k = len(disks)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            if disks[i].overlaps(disks[j]):
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    groups = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(disks[i])
    return list(groups.values())


def _cluster_contour(cluster, pad=1.05, n=256):
    """Circle enclosing the cluster with a small relative margin."""
    centers = np.array([d.center for d in cluster])
    mid = complex(np.mean(centers))
    reach = max(abs(d.center - mid) + d.radius for d in cluster)
    return Contour.circle(mid, pad * max(reach, 1e-12), n=n)


def count_in_disk_union(T, disks, reference=None, pad=1.05, n=256):
    """Certified counts per connected disk cluster.

    Each cluster gets one enclosing circular contour; count_arg_det runs for
    T (and the reference, when given) on it.  The contour must separate the
    cluster from the remaining disks; overlap with another cluster's
    contour raises.
    """
    clusters = cluster_disks(disks)
    results = []
    for cluster in clusters:
        contour = _cluster_contour(cluster, pad=pad, n=n)
        center = np.mean([d.center for d in cluster])
        reach = pad * max(abs(d.center - center) + d.radius for d in cluster)
        for other in clusters:
            if other is cluster:
                continue
            for d in other:
                if abs(d.center - center) <= reach + d.radius:
                    raise DomainError(
                        "disk clusters too close: enclosing contour would "
                        "cross a foreign disk"
                    )
        cert_T = count_arg_det(T, contour)
        entry = {
            "disks": cluster,
            "contour": contour,
            "count_T": cert_T.count,
            "certificate_T": cert_T,
        }
        if reference is not None:
            cert_ref = count_arg_det(reference, contour)
            entry["count_reference"] = cert_ref.count
            entry["certificate_reference"] = cert_ref
        results.append(entry)
    return results
