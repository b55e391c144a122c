import numpy as np
import pytest

from neploc.cheb_linearize import (
    ChebApprox,
    cheb_interp,
    colleague,
    eps_disks,
    interval_from_gershgorin,
    remainder_field,
)
from neploc.errors import (
    DefectiveColleague,
    DomainError,
    IllConditionedLeadingCoeff,
)
from neploc.matfun import ScalarTerm, SplitMatFun
from neploc.region_grid import Grid

from oracles import cheb_companion_roots, poly_det, poly_roots

SCAN_INTERVAL = (-7.7650, 3.3149)


def _hausdorff(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    d1 = max(np.min(np.abs(b - x)) for x in a)
    d2 = max(np.min(np.abs(a - x)) for x in b)
    return max(d1, d2)


def test_interp_reproduces_low_degree_polynomial():
    ch = cheb_interp(lambda z: z * z, (-1.0, 1.0), 2)
    got = ch.coeffs[:, 0, 0]
    assert np.allclose(got, [0.5, 0.0, 0.5], atol=1e-14)  # z^2 = (T0 + T2)/2
    assert ch.node_residual <= 1e-14


def test_clenshaw_matches_chebval():
    rng = np.random.default_rng(5)
    c = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    ch = ChebApprox(z_min=-1.0, z_max=1.0, degree=6,
                    coeffs=c[:, None, None], node_residual=0.0)
    xs = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    want = np.polynomial.chebyshev.chebval(xs, c)
    got = ch.eval_x(xs)[:, 0, 0]
    assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(want))


def test_variable_mapping_roundtrip():
    ch = cheb_interp(np.exp, (0.5, 4.5), 4)
    assert ch.mid == 2.5 and ch.half_width == 2.0
    zs = np.array([0.5, 1.0 + 1.0j, 4.5])
    assert np.allclose(ch.z_of_x(ch.x_of_z(zs)), zs, atol=1e-15)


def test_eval_and_deriv_against_exp():
    ch = cheb_interp(np.exp, (0.0, 2.0), 18)
    zs = np.linspace(0.1, 1.9, 17)
    vals = ch.eval_z(zs)[:, 0, 0]
    ders = ch.deriv_z(zs)[:, 0, 0]
    assert np.max(np.abs(vals - np.exp(zs))) <= 1e-13 * np.e**2
    assert np.max(np.abs(ders - np.exp(zs))) <= 1e-10


def test_as_matfun_wraps_interpolant():
    ch = cheb_interp(np.exp, (0.0, 2.0), 12)
    mf = ch.as_matfun(name="q")
    assert mf.n == 1
    for z in (0.3, 1.0 + 0.2j):
        assert np.allclose(mf.eval(z), ch.eval_z(z))
        assert np.allclose(mf.eval_deriv(z), ch.deriv_z(z))


def test_interp_input_kinds_agree():
    term = ScalarTerm.exp_minus_one(1.0)
    a = cheb_interp(term, (-1.0, 1.0), 8)
    b = cheb_interp(lambda z: np.exp(z) - 1.0, (-1.0, 1.0), 8)
    assert np.allclose(a.coeffs, b.coeffs, atol=1e-15)
    m = np.array([[1.0, 2.0], [0.0, 1.0]])
    t = SplitMatFun(2, [(ScalarTerm.polynomial([0.0, 1.0]), m)])
    c = cheb_interp(t, (-1.0, 1.0), 3)
    d = cheb_interp(lambda z: z * m, (-1.0, 1.0), 3)
    assert c.size == 2
    assert np.allclose(c.coeffs, d.coeffs, atol=1e-15)


def test_interp_validation():
    with pytest.raises(DomainError):
        cheb_interp(np.exp, (1.0, 1.0), 4)
    with pytest.raises(DomainError):
        cheb_interp(np.exp, (2.0, 1.0), 4)
    with pytest.raises(DomainError):
        cheb_interp(np.exp, (0.0, 1.0), 0)


def test_colleague_scalar_roots_and_det_identity():
    roots = np.array([0.3, -0.5, 0.9])
    ch = cheb_interp(lambda z: np.prod(z - roots), (-1.0, 1.0), 3)
    cs = colleague(ch)
    assert _hausdorff(cs.eigenvalues_x, roots) <= 1e-12
    assert np.allclose(cs.eigenvalues_z, cs.eigenvalues_x)  # identity map here
    # det(A_n^{-1} q(x)) = 2^(deg-1) det(xI - C) for the scalar case
    rng = np.random.default_rng(2)
    an = ch.coeffs[-1, 0, 0]
    for x in rng.standard_normal(4) + 1j * rng.standard_normal(4):
        lhs = ch.eval_x(x)[0, 0] / an
        rhs = 2.0 ** (ch.degree - 1) * np.linalg.det(x * np.eye(3) - cs.C)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_colleague_matrix_vs_det_root_oracle():
    rng = np.random.default_rng(8)
    coeffs = rng.standard_normal((4, 2, 2))
    ch = ChebApprox(z_min=-1.0, z_max=1.0, degree=3,
                    coeffs=coeffs.astype(complex), node_residual=0.0)
    cs = colleague(ch)
    assert cs.C.shape == (6, 6)
    # entrywise power-basis conversion, then a Leibniz determinant
    entries = [
        [list(np.polynomial.chebyshev.cheb2poly(coeffs[:, i, j])) for j in range(2)]
        for i in range(2)
    ]
    want = poly_roots(poly_det(entries))
    assert len(want) == 6
    assert _hausdorff(cs.eigenvalues_x, want) <= 1e-10


def test_colleague_degree_one():
    a0 = np.array([[1.0, 0.5], [0.0, 2.0]])
    ch = cheb_interp(lambda z: z * np.eye(2) + a0, (-1.0, 1.0), 1)
    cs = colleague(ch)
    assert cs.C.shape == (2, 2)
    assert _hausdorff(cs.eigenvalues_x, np.linalg.eigvals(-a0)) <= 1e-12


def test_colleague_rejects_ill_conditioned_leading():
    # interpolating a degree-1 function at degree 2 zeroes out A_2
    ch = cheb_interp(lambda z: z * np.eye(2), (-1.0, 1.0), 2)
    with pytest.raises(IllConditionedLeadingCoeff):
        colleague(ch)


def test_colleague_rejects_multiple_root():
    ch = cheb_interp(lambda z: (z - 0.5) ** 3, (-1.0, 1.0), 3)
    with pytest.raises(DefectiveColleague):
        colleague(ch)


def test_disks_scale_with_half_width():
    ch = cheb_interp(lambda z: np.exp(z) - 1.0, (0.0, 4.0), 8)
    cs = colleague(ch)
    disks = cs.disks_z(1e-6)
    assert len(disks) == 8
    for d, rho in zip(disks, cs.rho):
        assert d.radius == pytest.approx(1e-6 * rho * 2.0)  # h = 2
        assert d.label.startswith("colleague")


def test_exp_minus_one_scan_interval_degree_20():
    ch = cheb_interp(ScalarTerm.exp_minus_one(1.0), SCAN_INTERVAL, 20)
    zs = np.linspace(*SCAN_INTERVAL, 4001)
    err = np.max(np.abs(ch.eval_z(zs)[:, 0, 0] - (np.exp(zs) - 1.0)))
    assert err <= 1e-10
    cs = colleague(ch)
    oracle = cheb_companion_roots(ch.coeffs[:, 0, 0], *SCAN_INTERVAL)
    assert _hausdorff(cs.eigenvalues_z, oracle) <= 1e-10
    assert np.max(cs.rho) < 7.0
    # the interpolant pins the real eigenvalue at 0 to high accuracy
    assert np.min(np.abs(cs.eigenvalues_z)) <= 1e-9


def test_remainder_field_and_eps_disks():
    term = ScalarTerm.exp_minus_one(1.0)
    t = SplitMatFun(1, [(term, np.eye(1))])
    ch = cheb_interp(term, (-2.0, 2.0), 12)
    cs = colleague(ch)
    grid = Grid(-2.5, 2.5, -2.0, 2.0, 41, 33)
    field, disks, certified, counts = eps_disks(cs, ch, term, 1e-4, grid, T=t)
    assert field.kind == "pert_norm"
    assert field.values[16, 20] <= 1e-12  # grid point at z = 0
    assert len(disks) == 12
    assert all(d in disks for d in certified)
    assert len(certified) == 1  # only the eigenvalue near 0 sits in Omega_eps
    assert abs(certified[0].center) <= 1e-10
    assert len(counts) == 1
    assert counts[0]["count_T"] == 1
    assert counts[0]["count_reference"] == 1
    with pytest.raises(DomainError):
        eps_disks(cs, ch, term, 0.0, grid)


def test_remainder_field_masks_outside_domain():
    term = ScalarTerm.sqrt_principal()
    ch = cheb_interp(term, (0.5, 2.0), 10)
    grid = Grid(-1.0, 2.0, -0.5, 0.5, 13, 5)
    field = remainder_field(term, ch, grid)
    assert not field.domain_mask.all()
    assert np.all(np.isnan(field.values[~field.domain_mask]))


def test_interval_from_gershgorin_brackets_real_zone():
    # T(z) = [[z - 1, 0.2], [0.2, z + 1]]: union meets the real axis on
    # roughly [-1.2, 1.2]
    t = SplitMatFun(
        2,
        [(ScalarTerm.polynomial([0.0, 1.0]), np.eye(2)),
         (ScalarTerm.constant(1.0), np.array([[-1.0, 0.2], [0.2, 1.0]]))],
    )
    lo, hi = interval_from_gershgorin(t, -3.0, 3.0, n=1201)
    assert lo <= -1.2 <= hi and lo <= 1.2 <= hi
    assert lo >= -1.5 and hi <= 1.5
    with pytest.raises(DomainError):
        interval_from_gershgorin(t, 10.0, 12.0, n=51)
