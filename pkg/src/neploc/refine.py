"""Newton refinement of eigenpairs through the bordered system

    F(v, lam) = (T(lam) v, c* v - 1) = 0,

with Jacobian [[T(lam), T'(lam) v], [c*, 0]].  The border vector c is frozen
at the initial vector, which keeps the Jacobian nonsingular at simple
eigenvalues; a singular Jacobian triggers a restart with a fresh random
border, at most three times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainExit, NoConvergence, SingularJacobian

__all__ = ["EigenPair", "newton_bordered", "refine_batch"]


@dataclass(frozen=True)
class EigenPair:
    """Converged (or best-effort) eigenpair with its residual certificate."""

    lam: complex
    v: np.ndarray
    residual: float
    iterations: int

    def as_dict(self):
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "residual": self.residual,
            "iters": self.iterations,
        }


def _residual(T, lam, v):
    tl = T._eval_defined(lam)
    return float(np.linalg.norm(tl @ v)), float(np.linalg.norm(tl, "fro"))


def _newton_once(T, lam0, v0, c, tol, maxit):
    n = T.n
    lam = complex(lam0)
    v = np.array(v0, dtype=complex)
    v = v / np.linalg.norm(v)
    steps = []
    best = None
    for it in range(maxit + 1):
        if not T.defined_at(lam):
            raise DomainExit(f"iterate lambda={lam} left the domain")
        tl = T._eval_defined(lam)
        res = float(np.linalg.norm(tl @ v))
        scale = float(np.linalg.norm(tl, "fro"))
        if best is None or res < best[2]:
            best = (lam, v.copy(), res, it)
        if res <= tol * max(scale, 1e-300):
            vn = v / np.linalg.norm(v)
            res_n, _ = _residual(T, lam, vn)
            return EigenPair(lam=lam, v=vn, residual=res_n, iterations=it), steps
        if it == maxit:
            break
        tp = T._deriv_defined(lam)
        jac = np.zeros((n + 1, n + 1), dtype=complex)
        jac[:n, :n] = tl
        jac[:n, n] = tp @ v
        jac[n, :n] = np.conj(c)
        rhs = np.concatenate([-(tl @ v), [1.0 - np.vdot(c, v)]])
        try:
            delta = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError:
            raise SingularJacobian(f"bordered Jacobian singular at lambda={lam}")
        cond_probe = np.linalg.norm(delta)
        if not np.isfinite(cond_probe):
            raise SingularJacobian(f"bordered Jacobian blew up at lambda={lam}")
        v = v + delta[:n]
        dlam = complex(delta[n])
        lam = lam + dlam
        steps.append(abs(dlam))
    err = NoConvergence(
        f"no convergence in {maxit} iterations; best residual {best[2]:.3e}"
    )
    err.diagnostics = {
        "best": EigenPair(best[0], best[1] / np.linalg.norm(best[1]),
                          best[2], best[3]),
        "steps": steps,
    }
    raise err


def newton_bordered(T, lam0, v0=None, tol=1e-12, maxit=20, seed=0):
    """Refine one eigenvalue estimate; returns a converged EigenPair.

    Success means ||T(lam) v|| <= tol ||T(lam)||_F with ||v|| = 1.  When v0
    is absent the smallest right singular vector of T(lam0) is used.
    """
    lam0 = complex(lam0)
    if not T.defined_at(lam0):
        raise DomainExit(f"start lambda0={lam0} outside the domain")
    if v0 is None:
        _, _, vh = np.linalg.svd(T._eval_defined(lam0))
        v0 = np.conj(vh[-1])
    c = np.array(v0, dtype=complex)
    c = c / np.linalg.norm(c)
    rng = np.random.default_rng(seed)
    for attempt in range(4):
        try:
            pair, _ = _newton_once(T, lam0, v0, c, tol, maxit)
            return pair
        except SingularJacobian:
            if attempt == 3:
                raise
            c = rng.standard_normal(T.n) + 1j * rng.standard_normal(T.n)
            c = c / np.linalg.norm(c)
    raise SingularJacobian("unreachable")


def refine_batch(T, starts, tol=1e-12, maxit=20, dedup_tol=1e-8):
    """Refine every start, never aborting on individual failures.

    Returns (pairs, records).  pairs holds converged eigenpairs deduplicated
    at dedup_tol (smallest residual wins); records is one JSON-ready dict
    per start with its status and the |lambda - lambda0| move.
    """
    records = []
    converged = []
    for lam0 in starts:
        lam0 = complex(lam0)
        row = {"start": [lam0.real, lam0.imag]}
        try:
            pair = newton_bordered(T, lam0, tol=tol, maxit=maxit)
            row.update(pair.as_dict())
            row["delta"] = abs(pair.lam - lam0)
            row["status"] = "converged"
            converged.append((pair, lam0))
        except (NoConvergence, SingularJacobian, DomainExit) as e:
            row["status"] = type(e).__name__
            row["message"] = str(e)
            best = getattr(e, "diagnostics", {}).get("best") if hasattr(e, "diagnostics") else None
            if isinstance(getattr(e, "diagnostics", None), dict) and best is not None:
                row["best_residual"] = best.residual
        records.append(row)

    pairs = []
    for pair, _ in sorted(converged, key=lambda t: t[0].residual):
        if all(abs(pair.lam - kept.lam) >= dedup_tol for kept in pairs):
            pairs.append(pair)
    pairs.sort(key=lambda p: (p.lam.real, p.lam.imag))
    return pairs, records
