"""Single-delay characteristic function T(z) = -zI + A0 + A1 e^{-z} with a
companion A0 and rank-one A1.

delay_basis builds the similarity that turns A1 into diag(mu1, 0, 0) while
diagonalizing the trailing 2x2 block of the transformed A0; the Gershgorin
regions of the transformed function are then unions of scalar conditions
|-z + mu_j e^{-z}| <= rho_j.  delay_second_bound adds the complementary
bound from diagonalizing A0 instead: |d_i - z| <= gamma_i |e^{-z}|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    NilpotentA1,
    NotCompanion,
    NotRankOne,
    TrailingBlockDefective,
)
from ..linear_compare import eigenbasis
from ..matfun import Domain, PairSplitFun, ScalarTerm, SplitMatFun
from ..region_grid import RegionField

__all__ = [
    "DelayInstance",
    "DelayBasis",
    "delay_build",
    "delay_matfun",
    "delay_basis",
    "delay_second_bound",
]

# documented fallback instance: characteristic polynomial of A0 is
# s^3 + 2s^2 + 3s + 4, and A1 = e3 c^T has the nonzero eigenvalue c[2] = -13
_FALLBACK_LAST_ROW = np.array([-4.0, -3.0, -2.0])
_FALLBACK_C = np.array([-2.0, 1.0, -13.0])


@dataclass(frozen=True)
class DelayInstance:
    A0: np.ndarray
    A1: np.ndarray
    provenance: str

    @property
    def n(self):
        return self.A0.shape[0]


def _check_companion(A0):
    A0 = np.asarray(A0, dtype=float)
    n = A0.shape[0]
    if A0.shape != (n, n):
        raise NotCompanion(f"A0 must be square, got {A0.shape}")
    shift = np.zeros((n - 1, n))
    shift[:, 1:] = np.eye(n - 1)
    if np.linalg.norm(A0[: n - 1] - shift) > 1e-12 * max(np.linalg.norm(A0), 1.0):
        raise NotCompanion("A0 rows 1..n-1 are not the companion shift pattern")
    return A0


def _check_rank_one(A1):
    A1 = np.asarray(A1, dtype=float)
    sv = np.linalg.svd(A1, compute_uv=False)
    if sv[0] == 0.0 or sv[1] > 1e-12 * sv[0]:
        raise NotRankOne(
            f"A1 second singular value {sv[1]:.3e} vs largest {sv[0]:.3e}"
        )
    return A1


def delay_build(source=None, seed=0):
    """Instance from an .npz file (arrays A0, A1) or the synthetic fallback.

    seed=0 reproduces the documented fallback exactly; other seeds vary the
    companion row and the rank-one factors while keeping mu1 = -13.
    """
    if source is not None:
        data = np.load(source) if isinstance(source, str) else source
        A0 = _check_companion(np.asarray(data["A0"], dtype=float))
        A1 = _check_rank_one(np.asarray(data["A1"], dtype=float))
        if A0.shape != A1.shape:
            raise NotRankOne(f"A0 and A1 sizes differ: {A0.shape} vs {A1.shape}")
        return DelayInstance(A0=A0, A1=A1, provenance="file")
    if seed == 0:
        last, c = _FALLBACK_LAST_ROW, _FALLBACK_C
    else:
        rng = np.random.default_rng(seed)
        last = rng.uniform(-5.0, -1.0, size=3)
        c = rng.uniform(-3.0, 3.0, size=3)
        c[2] = -13.0
    A0 = np.zeros((3, 3))
    A0[0, 1] = A0[1, 2] = 1.0
    A0[2] = last
    A1 = np.outer(np.array([0.0, 0.0, 1.0]), c)
    return DelayInstance(
        A0=_check_companion(A0),
        A1=_check_rank_one(A1),
        provenance=f"synthetic(seed={seed})",
    )


def delay_matfun(inst):
    """T(z) = -zI + A0 + A1 e^{-z} in split form."""
    n = inst.n
    return SplitMatFun(
        n,
        [
            (ScalarTerm.polynomial([0.0, -1.0]), np.eye(n)),
            (ScalarTerm.constant(1.0), inst.A0),
            (ScalarTerm.exp_scaled(-1.0), inst.A1),
        ],
        domain=Domain.whole_plane(),
        name="delay",
    )


@dataclass(frozen=True)
class DelayBasis:
    """Similarity V with V^{-1} A1 V = diag(mu1, 0, 0) and the trailing 2x2
    of E = V^{-1} A0 V diagonal."""

    V: np.ndarray
    mus: np.ndarray  # (mu1, 0, 0)
    E: np.ndarray

    @property
    def mu1(self):
        return self.mus[0]

    @property
    def column_rho(self):
        return np.sum(np.abs(self.E), axis=0)

    def diagonal_fun(self):
        """D(z) = diag(-z + mu_j e^{-z})."""
        n = len(self.mus)
        return SplitMatFun(
            n,
            [
                (ScalarTerm.polynomial([0.0, -1.0]), np.eye(n)),
                (ScalarTerm.exp_scaled(-1.0), np.diag(self.mus)),
            ],
            name="delay.basis.diag",
        )

    def matfun(self):
        """-zI + D1 e^{-z} + E with the split attached (E the constant part)."""
        n = len(self.mus)
        E_fun = SplitMatFun(n, [(ScalarTerm.constant(1.0), self.E)],
                            name="delay.basis.pert")
        return PairSplitFun(self.diagonal_fun(), E_fun, name="delay.basis")

    def scalar_conditions(self, z, alpha=0.0):
        """Margins rho_j - |-z + mu_j e^{-z}|; alpha=0 gives column sums."""
        z = complex(z)
        f = -z + self.mus * np.exp(-z)
        r = np.sum(np.abs(self.E), axis=1)
        c = np.sum(np.abs(self.E), axis=0)
        return r**alpha * c ** (1.0 - alpha) - np.abs(f)


def delay_basis(inst):
    """Build the rank-one-adapted similarity for the instance."""
    A1 = np.asarray(inst.A1, dtype=float)
    u, s, vt = np.linalg.svd(A1)
    a = u[:, 0] * s[0]
    bvec = vt[0]
    mu1 = float(bvec @ a)
    if abs(mu1) <= 1e-12 * max(s[0], 1.0):
        raise NilpotentA1(f"A1 has (numerically) zero trace eigenvalue {mu1:.3e}")
    # kernel of A1 = orthogonal complement of bvec
    kernel = vt[1:].T
    V0 = np.column_stack([a / np.linalg.norm(a), kernel])
    E0 = np.linalg.solve(V0, inst.A0 @ V0)
    trailing = E0[1:, 1:]
    try:
        basis = eigenbasis(trailing)
    except Exception as e:
        raise TrailingBlockDefective(f"trailing 2x2 block not diagonalizable: {e}")
    R = basis.V
    V = V0 @ np.block([
        [np.ones((1, 1)), np.zeros((1, len(R)))],
        [np.zeros((len(R), 1)), R],
    ])
    E = np.linalg.solve(V, inst.A0 @ V)
    D1 = np.linalg.solve(V, inst.A1 @ V)
    mus = np.zeros(inst.n)
    mus[0] = mu1
    off = D1.copy()
    off[0, 0] -= mu1
    if np.linalg.norm(off) > 1e-10 * max(abs(mu1), 1.0):
        raise NotRankOne("transformed A1 is not diag(mu1, 0, 0)")
    trail = E[1:, 1:].copy()
    np.fill_diagonal(trail, 0.0)
    if np.linalg.norm(trail) > 1e-10 * max(np.linalg.norm(E), 1.0):
        raise TrailingBlockDefective("trailing block of V^{-1} A0 V not diagonal")
    return DelayBasis(V=V, mus=mus, E=E)


def delay_second_bound(inst, grid):
    """Union field of gamma_i |e^{-z}| - |d_i - z| from diagonalizing A0.

    d_i are the eigenvalues of A0 and gamma_i the absolute row sums of the
    transformed A1.  Intended for intersection with the first Gershgorin
    field; the region is bounded from the right because |e^{-z}| decays.
    """
    basis = eigenbasis(np.asarray(inst.A0, dtype=complex))
    d = basis.eigenvalues
    Ebreve = basis.W @ np.asarray(inst.A1, dtype=complex) @ basis.V
    gamma = np.sum(np.abs(Ebreve), axis=1)
    zs = grid.points()
    decay = np.abs(np.exp(-zs))
    values = np.empty(zs.shape + (inst.n,))
    for i in range(inst.n):
        values[..., i] = gamma[i] * decay - np.abs(d[i] - zs)
    return RegionField(
        grid=grid,
        kind="gershgorin",
        values=values,
        domain_mask=np.ones(zs.shape, dtype=bool),
        alpha=1.0,
    )
