"""The SPD exponential-plus-quadratic family T(z) = B(e^z - 1) + A z^2 - aI.

Instances come from a data file (.npz with arrays A, B and optional alpha)
or from a documented synthetic generator: random SPD matrices with
eigenvalues in [1, 10], alpha = 100.  The simplified congruent form
U^T T(z) U = D_B e^z + I z^2 + E turns the Gershgorin analysis into scalar
conditions |beta_j e^z + z^2| <= rho_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import NotSPD, PencilNotDefinite
from ..matfun import Domain, PairSplitFun, ScalarTerm, SplitMatFun

__all__ = [
    "HadelerInstance",
    "SimplifiedHadeler",
    "hadeler_build",
    "hadeler_matfun",
    "hadeler_simplify",
]


@dataclass(frozen=True)
class HadelerInstance:
    A: np.ndarray
    B: np.ndarray
    alpha: float
    provenance: str

    @property
    def n(self):
        return self.A.shape[0]


def _check_spd(M, label):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSPD(f"{label} must be square, got shape {M.shape}")
    scale = max(float(np.linalg.norm(M)), 1e-300)
    if np.linalg.norm(M - M.T) > 1e-12 * scale:
        raise NotSPD(f"{label} is not symmetric")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise NotSPD(f"{label} is not positive definite")
    return M


def _random_spd(rng, n, lo=1.0, hi=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = rng.uniform(lo, hi, size=n)
    m = (q * eigs) @ q.T
    return 0.5 * (m + m.T)


def hadeler_build(source=None, n=8, seed=1, alpha=100.0):
    """Instance from an .npz file (arrays A, B[, alpha]) or synthetic."""
    if source is not None:
        data = np.load(source) if isinstance(source, str) else source
        A = _check_spd(np.asarray(data["A"], dtype=float), "A")
        B = _check_spd(np.asarray(data["B"], dtype=float), "B")
        if A.shape != B.shape:
            raise NotSPD(f"A and B sizes differ: {A.shape} vs {B.shape}")
        a = float(data["alpha"]) if "alpha" in data else float(alpha)
        return HadelerInstance(A=A, B=B, alpha=a, provenance="file")
    rng = np.random.default_rng(seed)
    A = _check_spd(_random_spd(rng, n), "A")
    B = _check_spd(_random_spd(rng, n), "B")
    return HadelerInstance(A=A, B=B, alpha=float(alpha),
                           provenance=f"synthetic(seed={seed})")


def hadeler_matfun(inst):
    """T(z) = B(e^z - 1) + A z^2 - alpha I in split form."""
    n = inst.n
    return SplitMatFun(
        n,
        [
            (ScalarTerm.exp_minus_one(1.0), inst.B),
            (ScalarTerm.polynomial([0.0, 0.0, 1.0]), inst.A),
            (ScalarTerm.constant(-inst.alpha), np.eye(n)),
        ],
        domain=Domain.whole_plane(),
        name="hadeler",
    )


@dataclass(frozen=True)
class SimplifiedHadeler:
    """Congruence-transformed data: U^T T(z) U = D_B e^z + I z^2 + E."""

    betas: np.ndarray  # diagonal of D_B, positive
    E: np.ndarray  # constant, -U^T (alpha I + B) U
    U: np.ndarray

    @property
    def n(self):
        return len(self.betas)

    @property
    def rho(self):
        """Absolute row sums of E: the scalar-condition radii."""
        return np.sum(np.abs(self.E), axis=1)

    def diagonal_fun(self):
        """D(z) = diag(beta_j e^z + z^2)."""
        n = self.n
        return SplitMatFun(
            n,
            [
                (ScalarTerm.exp_scaled(1.0), np.diag(self.betas)),
                (ScalarTerm.polynomial([0.0, 0.0, 1.0]), np.eye(n)),
            ],
            name="hadeler.simplified.diag",
        )

    def matfun(self):
        """The transformed function with its D + E split attached."""
        n = self.n
        E_fun = SplitMatFun(n, [(ScalarTerm.constant(1.0), self.E)],
                            name="hadeler.simplified.pert")
        return PairSplitFun(self.diagonal_fun(), E_fun, name="hadeler.simplified")

    def scalar_conditions(self, z):
        """Margins rho_j - |beta_j e^z + z^2| at one point (j-th region test)."""
        z = complex(z)
        f = self.betas * np.exp(z) + z * z
        return self.rho - np.abs(f)


def hadeler_simplify(inst):
    """A-orthonormal eigenbasis of the pencil (B, A) and the constant E.

    U satisfies U^T A U = I and U^T B U = diag(betas); then
    U^T T(z) U = D_B e^z + I z^2 + E with E = -U^T(alpha I + B)U.
    """
    try:
        betas, U = scipy.linalg.eigh(inst.B, inst.A)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise PencilNotDefinite(f"pencil (B, A) eigensolve failed: {e}")
    if np.any(betas <= 0):
        raise PencilNotDefinite("pencil (B, A) has nonpositive eigenvalues")
    E = -U.T @ (inst.alpha * np.eye(inst.n) + inst.B) @ U
    return SimplifiedHadeler(betas=betas, E=E, U=U)
