"""Scalar analytic machinery: Lambert W, Zolotarev inverse square root,
closed-form 2x2 transfer matrix exponentials, and the disk bounds used by
the simplified Hadeler analysis.

Everything here is a pure stateless function; all are safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence, ZeroDerivative

__all__ = [
    "lambert_w",
    "delay_zeros",
    "hadeler_curve",
    "hadeler_zeros",
    "taylor_disk",
    "TaylorDiskBound",
    "zolotarev_invsqrt",
    "RationalInvSqrt",
    "transfer_matrix",
    "transfer_matrix_dc",
]

_INV_E = float(np.exp(-1.0))


# -- Lambert W ---------------------------------------------------------------


def _halley(w, z, maxit=60):
    """Halley iteration on w e^w = z from the supplied start."""
    for _ in range(maxit):
        ew = np.exp(w)
        f = w * ew - z
        if abs(f) <= 1e-14 * (1.0 + abs(z)):
            # one Newton polish, then stop; avoids dithering at roundoff
            d = ew * (w + 1.0)
            if d != 0.0:
                w = w - f / d
            return w
        if w == -1.0:
            d = ew * (w + 1.0)  # Newton step degenerate too; bail below
        else:
            d = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        if d == 0.0:
            break
        dw = f / d
        w = w - dw
        if abs(dw) <= 1e-16 * (1.0 + abs(w)):
            return w
    raise NoConvergence(f"Lambert W iteration stalled at w={w} for z={z}")


def _initial_guess(k, z):
    if k == 0 and abs(z) <= 0.25:
        # Taylor series of the principal branch about 0
        return z * (1.0 - z * (1.0 - 1.5 * z + (8.0 / 3.0) * z * z))
    p2 = 2.0 * (np.e * z + 1.0)
    if k in (0, -1) and abs(p2) < 0.5:
        # series about the branch point -1/e; sign selects the sheet
        p = np.sqrt(p2)
        if k == -1 and (z.imag > 0 or (z.imag == 0 and z.real < -_INV_E)):
            p = -p
        if k == -1 and z.imag == 0 and z.real >= -_INV_E:
            p = -p
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p2 * p / 2.0
    if k == -1 and z.imag == 0.0 and -_INV_E <= z.real < 0.0:
        # real lower branch: w = log(-z) - log(-log(-z)) is a good start
        l1 = np.log(-z.real)
        return complex(l1 - np.log(-l1))
    l1 = np.log(z) + 2.0j * np.pi * k
    if k == 0 and abs(l1) < 1.5:
        # asymptotic series degenerates when log z ~ 0; log(1+z) is a fine
        # principal-branch start there
        return np.log(1.0 + z)
    l2 = np.log(l1)
    return l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1)


def lambert_w(k, z):
    """The k-th branch of the Lambert W function.

    Solves w e^w = z with a branch-aware initial guess followed by Halley
    iteration.  Residual |w e^w - z| <= 1e-12 (1 + |z|) on return.  At the
    branch point -1/e the branches k = 0, -1 return exactly -1.
    """
    k = int(k)
    z = complex(z)
    if z == 0.0:
        if k == 0:
            return 0.0 + 0.0j
        raise DomainError("W_k(0) is undefined for k != 0")
    if k in (0, -1) and abs(np.e * z + 1.0) <= 4e-15:
        return -1.0 + 0.0j
    w = _halley(complex(_initial_guess(k, z)), z)
    res = abs(w * np.exp(w) - z)
    if res > 1e-12 * (1.0 + abs(z)):
        raise NoConvergence(f"Lambert W residual {res:.2e} too large for z={z}, k={k}")
    return w


def delay_zeros(mu, k_range):
    """Solutions of z e^z = mu: the points W_k(mu) for k in k_range."""
    mu = complex(mu)
    if mu == 0.0:
        raise DomainError("z e^z = 0 only at z = 0; no branch structure")
    return [lambert_w(k, mu) for k in k_range]


# -- simplified Hadeler analysis ----------------------------------------------


def hadeler_curve(m, theta):
    """Point z_m(theta) = (2 theta + (2m-1) pi)(cot(theta) + i).

    For integer m these curves sweep the preimage of the imaginary axis
    under z -> (-z/2) exp(-z/2); the zeros of beta e^z + z^2 interlace them.
    """
    if not 0.0 < theta < np.pi:
        raise DomainError(f"theta must lie in (0, pi), got {theta}")
    t = 2.0 * theta + (2.0 * m - 1.0) * np.pi
    return t * (1.0 / np.tan(theta) + 1.0j)


def hadeler_zeros(beta, k_range):
    """Closed-form zeros of f(z) = beta e^z + z^2 for beta > 0.

    Rewriting f = 0 as (-z/2) exp(-z/2) = +-(i/2) sqrt(beta) gives
    z = -2 W_k(+-(i/2) sqrt(beta)) over branches k and both signs.
    """
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    rhs = 0.5j * np.sqrt(beta)
    out = []
    for k in k_range:
        for s in (+1.0, -1.0):
            out.append(-2.0 * lambert_w(k, s * rhs))
    return out


@dataclass(frozen=True)
class TaylorDiskBound:
    """Disk radius certificate for a zero of f(z) = beta e^z + z^2.

    With f(lam + w) = b w + R(w), b = lam (2 - lam), the remainder obeys
    |R(w)| <= (1 + (|lam|^2 / 2) e^{|w|}) |w|^2, so |f| > rho on the circle
    |w| = 2 rho / |b| whenever condition_holds; any Gershgorin component of
    {|f| <= rho} containing lam then lies inside that disk.
    """

    lam: complex
    rho: float
    b: complex
    radius: float
    condition_holds: bool


def taylor_disk(lam, rho):
    """Build the TaylorDiskBound at approximate zero lam with radius input rho."""
    lam = complex(lam)
    rho = float(rho)
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    b = lam * (2.0 - lam)
    if b == 0.0:
        raise ZeroDerivative("linearization coefficient b = lam (2 - lam) vanishes")
    radius = 2.0 * rho / abs(b)
    lhs = 1.0 + 0.5 * abs(lam) ** 2 * np.exp(radius)
    holds = bool(lhs < abs(b) ** 2 / (4.0 * rho))
    return TaylorDiskBound(lam=lam, rho=rho, b=b, radius=radius, condition_holds=holds)


# -- Zolotarev rational inverse square root -----------------------------------


def _agm(a, b):
    """Arithmetic-geometric mean of positive reals."""
    a, b = float(a), float(b)
    # quadratic convergence: doubles are fully converged well within 40 steps
    for _ in range(40):
        if abs(a - b) <= 2.0 * np.finfo(float).eps * a:
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * (a + b)


def _ellip_k(kc):
    """Complete elliptic integral K for complementary modulus kc in (0, 1].

    K(k) with k^2 = 1 - kc^2, via K = pi / (2 agm(1, kc)).
    """
    if kc <= 0:
        raise DomainError("complementary modulus must be positive")
    return np.pi / (2.0 * _agm(1.0, kc))


def _sncndn(u, mc):
    """Jacobi elliptic functions sn, cn, dn at real u.

    mc is the complementary parameter 1 - k^2 in (0, 1].  Classic
    descending Landen transformation; relative accuracy near 1e-15.
    """
    ca = 1e-16
    if mc >= 1.0:
        return np.sin(u), np.cos(u), 1.0
    if mc <= 0.0:
        raise DomainError("parameter out of range for the real Landen ladder")
    a, dn = 1.0, 1.0
    em, en = [], []
    c = 0.0
    for _ in range(16):
        em.append(a)
        emc = np.sqrt(mc)
        en.append(emc)
        c = 0.5 * (a + emc)
        if abs(a - emc) <= ca * a:
            break
        mc = a * emc
        a = c
    u = c * u
    sn, cn = np.sin(u), np.cos(u)
    if sn != 0.0:
        aa = cn / sn
        c = aa * c
        for b, e in zip(reversed(em), reversed(en)):
            aa = c * aa
            c = dn * c
            dn = (e + aa) / (b + aa)
            aa = c / b
        aa = 1.0 / np.sqrt(c * c + 1.0)
        sn = aa if sn >= 0.0 else -aa
        cn = c * sn
    return sn, cn, dn


@dataclass(frozen=True)
class RationalInvSqrt:
    """Rational approximation r(z) = sum_j gamma_j / (z - xi_j) of z^(-1/2).

    Poles xi_j are strictly negative and weights gamma_j strictly positive,
    so r is analytic on the closed right half-plane.  recorded_error is the
    max of |sqrt(z) r(z) - 1| over a dense logarithmic sample of [m, M].
    """

    m: float
    M: float
    n_poles: int
    poles: np.ndarray
    weights: np.ndarray
    recorded_error: float

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.sum(self.weights / (z[..., None] - self.poles), axis=-1)

    def as_dict(self):
        return {
            "m": self.m,
            "M": self.M,
            "n_poles": self.n_poles,
            "poles": list(map(float, self.poles)),
            "weights": list(map(float, self.weights)),
            "recorded_error": self.recorded_error,
        }


def zolotarev_invsqrt(m, M, n_poles, sample=10_000):
    """Zolotarev-grade rational approximation of z^(-1/2) on [m, M].

    Midpoint rule in the elliptic substitution t = sqrt(m) sc(u, k),
    k^2 = 1 - m/M, applied to z^(-1/2) = (2/pi) int_0^inf dt/(t^2 + z).
    The N-point rule places its poles exactly at Zolotarev's optimal
    locations -m sc^2((j - 1/2) K / N) and converges at the optimal rate;
    its relative error equioscillates with 2N sign changes on [m, M].
    """
    m, M = float(m), float(M)
    if not 0.0 < m < M:
        raise DomainError(f"need 0 < m < M, got [{m}, {M}]")
    n_poles = int(n_poles)
    if n_poles < 1:
        raise DomainError("need at least one pole")
    kc = np.sqrt(m / M)
    kk = _ellip_k(kc)
    mc = m / M  # complementary parameter 1 - k^2
    poles = np.empty(n_poles)
    weights = np.empty(n_poles)
    for j in range(n_poles):
        u = (j + 0.5) * kk / n_poles
        sn, cn, dn = _sncndn(u, mc)
        poles[j] = -m * (sn / cn) ** 2
        weights[j] = (2.0 * kk * np.sqrt(m) / (np.pi * n_poles)) * dn / cn**2
    zs = np.geomspace(m, M, sample)
    approx = RationalInvSqrt(m, M, n_poles, poles, weights, 0.0)
    err = float(np.max(np.abs(np.sqrt(zs) * approx(zs) - 1.0)))
    return RationalInvSqrt(m, M, n_poles, poles, weights, err)


# -- transfer matrices ---------------------------------------------------------

# series cutoffs: below _SERIES_EVAL the 4-term even series for cosh(sqrt(c) x)
# and sinh(sqrt(c) x)/sqrt(c) are exact to machine precision; the derivative
# form (x cosh - g)/(2c) cancels, so it switches earlier
_SERIES_EVAL = 1e-4
_SERIES_DERIV = 1e-2


def transfer_matrix(c, x):
    """exp(x [[0, 1], [c, 0]]) in closed form, entire in c.

    Equals [[cosh(s x), sinh(s x)/s], [s sinh(s x), cosh(s x)]] with
    s = sqrt(c); both entries are even in s, so the branch of the square
    root is immaterial, and a short even series takes over for small |c| x^2.
    """
    c = complex(c)
    x = float(x)
    w = c * x * x
    if abs(w) < _SERIES_EVAL:
        ch = 1.0 + w * (1.0 / 2.0 + w * (1.0 / 24.0 + w / 720.0))
        g = x * (1.0 + w * (1.0 / 6.0 + w * (1.0 / 120.0 + w / 5040.0)))
    else:
        s = np.sqrt(c)
        ch = np.cosh(s * x)
        g = np.sinh(s * x) / s
    return np.array([[ch, g], [c * g, ch]], dtype=complex)


def transfer_matrix_dc(c, x):
    """Derivative of transfer_matrix(c, x) with respect to c; entire in c."""
    c = complex(c)
    x = float(x)
    w = c * x * x
    if abs(w) < _SERIES_EVAL:
        g = x * (1.0 + w * (1.0 / 6.0 + w * (1.0 / 120.0 + w / 5040.0)))
    else:
        s = np.sqrt(c)
        g = np.sinh(s * x) / s
    dch = 0.5 * x * g
    if abs(w) < _SERIES_DERIV:
        # dg/dc = x^3 sum_k k w^(k-1) / (2k+1)!
        dg = x**3 * (
            1.0 / 6.0 + w * (2.0 / 120.0 + w * (3.0 / 5040.0 + w * 4.0 / 362880.0))
        )
    else:
        ch = np.cosh(np.sqrt(c) * x)
        dg = (x * ch - g) / (2.0 * c)
    return np.array([[dch, dg], [g + c * dg, dch]], dtype=complex)
