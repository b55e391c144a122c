import numpy as np
import pytest

from neploc.errors import DomainExit, NoConvergence
from neploc.matfun import Domain, ScalarTerm, SplitMatFun
from neploc.refine import EigenPair, newton_bordered, refine_batch


def _scalar(term, domain=None):
    return SplitMatFun(1, [(term, np.eye(1))], domain=domain)


def _poly(coeffs, domain=None):
    return _scalar(ScalarTerm.polynomial(coeffs), domain=domain)


def _coupled():
    # T(z) = [[z, 1], [1, z]], eigenvalues +-1, all simple
    return SplitMatFun(
        2,
        [(ScalarTerm.polynomial([0.0, 1.0]), np.eye(2)),
         (ScalarTerm.constant(1.0), np.array([[0.0, 1.0], [1.0, 0.0]]))],
    )


def test_newton_scalar_quadratic():
    t = _poly([-4.0, 0.0, 1.0])
    pair = newton_bordered(t, 1.9)
    assert abs(pair.lam - 2.0) <= 1e-12
    assert pair.iterations <= 8
    assert abs(np.linalg.norm(pair.v) - 1.0) <= 1e-14


def test_newton_exponential_to_origin():
    t = _scalar(ScalarTerm.exp_minus_one(1.0))
    pair = newton_bordered(t, 0.3 + 0.2j)
    assert abs(pair.lam) <= 1e-10  # nearest zero of e^z - 1 is 0


def test_newton_matrix_and_backward_error_link():
    t = _coupled()
    pair = newton_bordered(t, 0.9, tol=1e-13)
    assert abs(pair.lam - 1.0) <= 1e-12
    tl = t.eval(pair.lam)
    assert pair.residual <= 1e-13 * np.linalg.norm(tl, "fro") * 1.001
    # residual bounds sigma_min at the converged point
    smin = np.linalg.svd(tl, compute_uv=False)[-1]
    assert smin <= pair.residual * 1.0001 + 1e-16
    d = pair.as_dict()
    assert d["lambda"] == [pair.lam.real, pair.lam.imag]
    assert d["residual"] == pair.residual


def test_newton_default_v0_is_smallest_singular_vector():
    t = _coupled()
    p1 = newton_bordered(t, 1.05)
    _, _, vh = np.linalg.svd(t.eval(1.05))
    p2 = newton_bordered(t, 1.05, v0=np.conj(vh[-1]))
    assert abs(p1.lam - p2.lam) <= 1e-13


def test_newton_quadratic_step_contraction():
    # root just off the float grid, so the residual floor is positive and a
    # tiny tol drives the iteration to stagnation with full step history
    t = _poly([-4.000000000000001, 0.0, 1.0])
    with pytest.raises(NoConvergence) as ei:
        newton_bordered(t, 1.5, tol=1e-30, maxit=12)
    steps = [s for s in ei.value.diagnostics["steps"] if s > 1e-12]
    assert len(steps) >= 3
    for a, b in zip(steps, steps[1:]):
        assert b <= 0.5 * a * a / steps[0] + 1e-13  # C roughly 1/|first step|
    best = ei.value.diagnostics["best"]
    assert isinstance(best, EigenPair)
    assert abs(best.lam - 2.0) <= 1e-12


def test_newton_semisimple_double_is_benign():
    # T = z*I: the border kills the eigenvector component, one exact step
    t = SplitMatFun(2, [(ScalarTerm.polynomial([0.0, 1.0]), np.eye(2))])
    pair = newton_bordered(t, 0.1, maxit=15)
    assert pair.lam == 0.0


def test_newton_defective_eigenvalue_not_supported():
    # Jordan block [[z, 1], [0, z]]: linear contraction stalls far above the
    # relative-residual gate, which is the documented non-goal
    t = SplitMatFun(
        2,
        [(ScalarTerm.polynomial([0.0, 1.0]), np.eye(2)),
         (ScalarTerm.constant(1.0), np.array([[0.0, 1.0], [0.0, 0.0]]))],
    )
    with pytest.raises(NoConvergence) as ei:
        newton_bordered(t, 0.1, maxit=15)
    assert abs(ei.value.diagnostics["best"].lam) <= 1e-4


def test_newton_domain_exit():
    dom = Domain.rectangle(0.0 - 1.0j, 1.99 + 1.0j)
    t = _poly([-4.0, 0.0, 1.0], domain=dom)
    with pytest.raises(DomainExit):
        newton_bordered(t, 1.9)  # first step lands past re = 1.99
    with pytest.raises(DomainExit):
        newton_bordered(t, 5.0)  # start already outside


def test_refine_batch_dedup_and_order():
    t = _poly([-4.0, 0.0, 1.0])
    pairs, records = refine_batch(t, [1.9, 2.1, 2.05, -1.9], dedup_tol=1e-6)
    assert [round(p.lam.real) for p in pairs] == [-2, 2]  # sorted, deduped
    assert len(records) == 4
    for row in records:
        assert row["status"] == "converged"
        assert row["delta"] == pytest.approx(abs(
            complex(row["lambda"][0], row["lambda"][1])
            - complex(row["start"][0], row["start"][1])
        ))


def test_refine_batch_survives_divergent_start():
    t = _scalar(ScalarTerm.exp_minus_one(1.0))
    pairs, records = refine_batch(t, [0.1, 50.0], maxit=10)
    assert len(pairs) == 1
    assert abs(pairs[0].lam) <= 1e-10
    st = {r["status"] for r in records}
    assert "converged" in st and "NoConvergence" in st
    bad = next(r for r in records if r["status"] == "NoConvergence")
    assert "best_residual" in bad
    assert "message" in bad
