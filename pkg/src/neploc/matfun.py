"""Analytic matrix-valued functions T : Omega -> C^(n x n).

T is represented in split form sum_i f_i(z) A_i, where each scalar factor
f_i is drawn from a small set of analytic kinds carrying closed-form
derivatives, and each A_i is a constant matrix.  Problems that do not fit
the split form (the resonance matrix) subclass MatFun and supply their own
evaluation and derivative; everything downstream only uses the MatFun
interface.

All evaluation is pure and instances are immutable after construction, so
grid sweeps may evaluate one MatFun from many workers at once.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DimensionMismatch, DomainError, ParseError

__all__ = [
    "ScalarTerm",
    "Domain",
    "MatFun",
    "SplitMatFun",
    "LambdaMatFun",
    "PairSplitFun",
    "difference",
    "diagonal_of",
    "parse_problem",
]

_RAY_KINDS = ("whole_plane", "plane_minus_ray", "rectangle", "intersection")


class Domain:
    """Subset of C with a total membership test.

    Primitive kinds: the whole plane, the plane minus the ray
    {x + 0i : x <= 0}, and a closed axis-aligned rectangle.  Domains
    combine by intersection.
    """

    __slots__ = ("kind", "corners", "parts")

    def __init__(self, kind, corners=None, parts=()):
        if kind not in _RAY_KINDS:
            raise ValueError(f"unknown domain kind {kind!r}")
        self.kind = kind
        self.corners = corners
        self.parts = tuple(parts)

    @staticmethod
    def whole_plane():
        return Domain("whole_plane")

    @staticmethod
    def plane_minus_ray():
        """C minus the closed negative real ray, including the origin."""
        return Domain("plane_minus_ray")

    @staticmethod
    def rectangle(corner_a, corner_b):
        a, b = complex(corner_a), complex(corner_b)
        lo = complex(min(a.real, b.real), min(a.imag, b.imag))
        hi = complex(max(a.real, b.real), max(a.imag, b.imag))
        return Domain("rectangle", corners=(lo, hi))

    def intersect(self, other):
        parts = []
        for d in (self, other):
            parts.extend(d.parts if d.kind == "intersection" else (d,))
        return Domain("intersection", parts=parts)

    def contains(self, z):
        """Vectorized membership test; returns bool or bool array."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "whole_plane":
            out = np.ones(z.shape, dtype=bool)
        elif self.kind == "plane_minus_ray":
            out = ~((z.real <= 0.0) & (z.imag == 0.0))
        elif self.kind == "rectangle":
            lo, hi = self.corners
            out = (
                (z.real >= lo.real)
                & (z.real <= hi.real)
                & (z.imag >= lo.imag)
                & (z.imag <= hi.imag)
            )
        else:
            out = np.ones(z.shape, dtype=bool)
            for p in self.parts:
                out &= p.contains(z)
        return bool(out) if out.ndim == 0 else out

    def as_dict(self):
        if self.kind == "rectangle":
            lo, hi = self.corners
            return {
                "kind": "rectangle",
                "corners": [[lo.real, lo.imag], [hi.real, hi.imag]],
            }
        if self.kind == "intersection":
            return {"kind": "intersection", "parts": [p.as_dict() for p in self.parts]}
        return {"kind": self.kind}

    @staticmethod
    def from_dict(d, where="domain"):
        kind = _require(d, "kind", where)
        if kind == "whole_plane":
            return Domain.whole_plane()
        if kind == "plane_minus_ray":
            return Domain.plane_minus_ray()
        if kind == "rectangle":
            corners = _require(d, "corners", where)
            try:
                (a, b) = (_as_complex(c, where + ".corners") for c in corners)
            except TypeError:
                raise ParseError(f"{where}.corners: expected two [re, im] pairs")
            return Domain.rectangle(a, b)
        if kind == "intersection":
            parts = _require(d, "parts", where)
            return Domain(
                "intersection",
                parts=[Domain.from_dict(p, f"{where}.parts[{i}]") for i, p in enumerate(parts)],
            )
        raise ParseError(f"{where}.kind: unknown domain kind {kind!r}")

    def __repr__(self):
        return f"Domain({self.kind})"


class ScalarTerm:
    """Analytic scalar factor f(z) with an exact derivative.

    Kinds:
      polynomial(coeffs)   sum_k coeffs[k] z^k
      exp_scaled(a)        exp(a z)
      exp_minus_one(a)     exp(a z) - 1
      sqrt_principal       principal sqrt, cut on (-inf, 0]
      rational_pole(xi)    1/(z - xi)

    Derivatives are closed form; no numerical differentiation anywhere.
    """

    KINDS = ("polynomial", "exp_scaled", "exp_minus_one", "sqrt_principal", "rational_pole")

    __slots__ = ("kind", "coeffs", "a", "xi")

    def __init__(self, kind, coeffs=None, a=None, xi=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown scalar kind {kind!r}")
        self.kind = kind
        self.coeffs = None
        self.a = None
        self.xi = None
        if kind == "polynomial":
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.ndim != 1 or coeffs.size == 0:
                raise ValueError("polynomial needs a nonempty 1-D coefficient list")
            self.coeffs = coeffs
            self.coeffs.setflags(write=False)
        elif kind in ("exp_scaled", "exp_minus_one"):
            if a is None:
                raise ValueError(f"{kind} needs parameter a")
            self.a = complex(a)
        elif kind == "rational_pole":
            if xi is None:
                raise ValueError("rational_pole needs parameter xi")
            self.xi = complex(xi)

    @staticmethod
    def polynomial(coeffs):
        return ScalarTerm("polynomial", coeffs=coeffs)

    @staticmethod
    def constant(c):
        return ScalarTerm("polynomial", coeffs=[c])

    @staticmethod
    def exp_scaled(a):
        return ScalarTerm("exp_scaled", a=a)

    @staticmethod
    def exp_minus_one(a):
        return ScalarTerm("exp_minus_one", a=a)

    @staticmethod
    def sqrt_principal():
        return ScalarTerm("sqrt_principal")

    @staticmethod
    def rational_pole(xi):
        return ScalarTerm("rational_pole", xi=xi)

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(z, self.coeffs)
        if self.kind == "exp_scaled":
            return np.exp(self.a * z)
        if self.kind == "exp_minus_one":
            return np.exp(self.a * z) - 1.0
        if self.kind == "sqrt_principal":
            return np.sqrt(z)
        return 1.0 / (z - self.xi)

    def eval_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(
                z, np.polynomial.polynomial.polyder(self.coeffs)
            )
        if self.kind == "exp_scaled":
            return self.a * np.exp(self.a * z)
        if self.kind == "exp_minus_one":
            return self.a * np.exp(self.a * z)
        if self.kind == "sqrt_principal":
            return 0.5 / np.sqrt(z)
        return -1.0 / (z - self.xi) ** 2

    def defined_at(self, z):
        """Where f (and f') exist; the sqrt cut and poles are excluded."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "sqrt_principal":
            out = ~((z.real <= 0.0) & (z.imag == 0.0))
        elif self.kind == "rational_pole":
            out = z != self.xi
        else:
            out = np.ones(z.shape, dtype=bool)
        return bool(out) if out.ndim == 0 else out

    def as_dict(self):
        if self.kind == "polynomial":
            return {
                "kind": "polynomial",
                "coeffs": [[c.real, c.imag] for c in self.coeffs],
            }
        if self.kind in ("exp_scaled", "exp_minus_one"):
            return {"kind": self.kind, "a": [self.a.real, self.a.imag]}
        if self.kind == "rational_pole":
            return {"kind": "rational_pole", "xi": [self.xi.real, self.xi.imag]}
        return {"kind": self.kind}

    def __repr__(self):
        if self.kind == "polynomial":
            return f"ScalarTerm.polynomial({list(self.coeffs)})"
        if self.kind in ("exp_scaled", "exp_minus_one"):
            return f"ScalarTerm.{self.kind}({self.a})"
        if self.kind == "rational_pole":
            return f"ScalarTerm.rational_pole({self.xi})"
        return "ScalarTerm.sqrt_principal()"


class MatFun:
    """Analytic matrix-valued function on a domain.

    Subclasses implement _eval_defined and _deriv_defined for points already
    known to lie in the domain.  Public eval/eval_deriv enforce membership.
    """

    def __init__(self, n, domain, name=""):
        self.n = int(n)
        self.domain = domain
        self.name = name

    # -- interface ---------------------------------------------------------

    def _eval_defined(self, z):
        raise NotImplementedError

    def _deriv_defined(self, z):
        raise NotImplementedError

    def _terms_defined_at(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones(z.shape, dtype=bool)
        return bool(out) if out.ndim == 0 else out

    # -- public ------------------------------------------------------------

    def defined_at(self, z):
        """Domain membership and per-term definedness, vectorized."""
        inside = self.domain.contains(z)
        terms_ok = self._terms_defined_at(z)
        return inside & terms_ok if isinstance(inside, np.ndarray) else bool(inside and terms_ok)

    def eval(self, z):
        z = complex(z)
        if not self.defined_at(z):
            raise DomainError(f"z = {z} outside the domain of {self.describe()}")
        return self._eval_defined(z)

    def eval_deriv(self, z):
        z = complex(z)
        if not self.defined_at(z):
            raise DomainError(f"z = {z} outside the domain of {self.describe()}")
        return self._deriv_defined(z)

    def eval_grid(self, zs):
        """Evaluate at a flat array of points, all assumed defined.

        Returns a (len(zs), n, n) stack.  The default loops; split-form
        and builtin subclasses vectorize.
        """
        zs = np.asarray(zs, dtype=complex).ravel()
        out = np.empty((zs.size, self.n, self.n), dtype=complex)
        for i, z in enumerate(zs):
            out[i] = self._eval_defined(complex(z))
        return out

    def diagonal_split(self, z):
        """Split T(z) = diag(d) + E with E the exact off-diagonal part."""
        m = self.eval(z)
        d = np.array(np.diagonal(m), copy=True)
        e = m.copy()
        np.fill_diagonal(e, 0.0)
        return d, e

    def describe(self):
        return self.name or type(self).__name__

    def __repr__(self):
        return f"<{type(self).__name__} n={self.n} {self.describe()!r}>"


class SplitMatFun(MatFun):
    """Split form sum_i f_i(z) A_i with constant matrices A_i."""

    def __init__(self, n, terms, domain=None, name=""):
        if domain is None:
            domain = Domain.whole_plane()
        super().__init__(n, domain, name)
        packed = []
        for f, a in terms:
            a = np.array(a, dtype=complex)
            if a.shape != (self.n, self.n):
                raise DimensionMismatch(
                    f"term matrix shape {a.shape} does not match n={self.n}"
                )
            a.setflags(write=False)
            packed.append((f, a))
        if not packed:
            raise ValueError("split form needs at least one term")
        self.terms = tuple(packed)

    def _terms_defined_at(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones(z.shape, dtype=bool)
        for f, _ in self.terms:
            out = out & f.defined_at(z)
        return bool(out) if out.ndim == 0 else out

    def _eval_defined(self, z):
        out = np.zeros((self.n, self.n), dtype=complex)
        for f, a in self.terms:
            out += complex(f.eval(z)) * a
        return out

    def _deriv_defined(self, z):
        out = np.zeros((self.n, self.n), dtype=complex)
        for f, a in self.terms:
            out += complex(f.eval_deriv(z)) * a
        return out

    def eval_grid(self, zs):
        zs = np.asarray(zs, dtype=complex).ravel()
        out = np.zeros((zs.size, self.n, self.n), dtype=complex)
        for f, a in self.terms:
            out += f.eval(zs)[:, None, None] * a
        return out

    # -- split-form algebra (used by Gershgorin splits and guards) ---------

    def __add__(self, other):
        if not isinstance(other, SplitMatFun):
            return NotImplemented
        if other.n != self.n:
            raise DimensionMismatch("cannot add split forms of different size")
        return SplitMatFun(
            self.n,
            self.terms + other.terms,
            domain=self.domain.intersect(other.domain),
        )

    def __sub__(self, other):
        if not isinstance(other, SplitMatFun):
            return NotImplemented
        return self + other.scaled(-1.0)

    def scaled(self, c):
        return SplitMatFun(
            self.n, [(f, complex(c) * a) for f, a in self.terms], domain=self.domain
        )

    def diagonal_part(self):
        """The diagonal of T as a split-form function."""
        return SplitMatFun(
            self.n,
            [(f, np.diag(np.diagonal(a))) for f, a in self.terms],
            domain=self.domain,
            name=self.name + ".diag" if self.name else "",
        )

    def offdiagonal_part(self):
        terms = []
        for f, a in self.terms:
            off = np.array(a, copy=True)
            np.fill_diagonal(off, 0.0)
            terms.append((f, off))
        return SplitMatFun(
            self.n,
            terms,
            domain=self.domain,
            name=self.name + ".offdiag" if self.name else "",
        )

    def as_dict(self):
        return {
            "n": self.n,
            "domain": self.domain.as_dict(),
            "terms": [
                {
                    "scalar": f.as_dict(),
                    "matrix": [[[v.real, v.imag] for v in row] for row in a],
                }
                for f, a in self.terms
            ],
        }


class LambdaMatFun(MatFun):
    """MatFun backed by explicit callables; glue for derived functions."""

    def __init__(self, n, fun, dfun, domain=None, name="", defined=None):
        super().__init__(n, domain if domain is not None else Domain.whole_plane(), name)
        self._fun = fun
        self._dfun = dfun
        self._defined = defined

    def _terms_defined_at(self, z):
        if self._defined is None:
            return super()._terms_defined_at(z)
        out = self._defined(np.asarray(z, dtype=complex))
        return bool(out) if np.ndim(out) == 0 else out

    def _eval_defined(self, z):
        return np.asarray(self._fun(z), dtype=complex)

    def _deriv_defined(self, z):
        if self._dfun is None:
            raise NotImplementedError(f"{self.describe()} has no derivative")
        return np.asarray(self._dfun(z), dtype=complex)


class PairSplitFun(MatFun):
    """T(z) = D(z) + E(z) with the split itself part of the data.

    D must be diagonal-valued.  diagonal_split returns this split, not the
    entrywise one, so Gershgorin sums keep E's diagonal; guards and
    reference counts use the same pair.
    """

    def __init__(self, D, E, name=""):
        if D.n != E.n:
            raise DimensionMismatch(f"split sizes differ: {D.n} vs {E.n}")
        super().__init__(D.n, D.domain.intersect(E.domain), name)
        self.D = D
        self.E = E

    def _terms_defined_at(self, z):
        return self.D._terms_defined_at(z) & self.E._terms_defined_at(z)

    def _eval_defined(self, z):
        return self.D._eval_defined(z) + self.E._eval_defined(z)

    def _deriv_defined(self, z):
        return self.D._deriv_defined(z) + self.E._deriv_defined(z)

    def eval_grid(self, zs):
        return self.D.eval_grid(zs) + self.E.eval_grid(zs)

    def diagonal_split(self, z):
        z = complex(z)
        if not self.defined_at(z):
            raise DomainError(f"z = {z} outside the domain of {self.describe()}")
        d = np.array(np.diagonal(self.D._eval_defined(z)), copy=True)
        return d, self.E._eval_defined(z)


def difference(a, b):
    """The function z -> a(z) - b(z); keeps split form when both have it."""
    if isinstance(a, SplitMatFun) and isinstance(b, SplitMatFun):
        return a - b
    if a.n != b.n:
        raise DimensionMismatch(f"sizes differ: {a.n} vs {b.n}")

    def dfun(z):
        return a._deriv_defined(z) - b._deriv_defined(z)

    return LambdaMatFun(
        a.n,
        lambda z: a._eval_defined(z) - b._eval_defined(z),
        dfun,
        domain=a.domain.intersect(b.domain),
        name=f"({a.describe()} - {b.describe()})",
        defined=lambda z: a._terms_defined_at(z) & b._terms_defined_at(z),
    )


def diagonal_of(T):
    """The diagonal part of T as a standalone function."""
    if isinstance(T, SplitMatFun):
        return T.diagonal_part()

    def fun(z):
        return np.diag(np.diagonal(T._eval_defined(z)))

    def dfun(z):
        return np.diag(np.diagonal(T._deriv_defined(z)))

    return LambdaMatFun(
        T.n,
        fun,
        dfun,
        domain=T.domain,
        name=T.describe() + ".diag",
        defined=T._terms_defined_at,
    )


# -- problem files ----------------------------------------------------------


def _require(d, key, where):
    if not isinstance(d, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in d:
        raise ParseError(f"{where}: missing field {key!r}")
    return d[key]


def _as_complex(pair, where):
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise ParseError(f"{where}: complex entries are [re, im] pairs, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _parse_scalar(d, where):
    kind = _require(d, "kind", where)
    if kind == "polynomial":
        raw = _require(d, "coeffs", where)
        if not isinstance(raw, list) or not raw:
            raise ParseError(f"{where}.coeffs: expected a nonempty list")
        coeffs = [_as_complex(c, f"{where}.coeffs[{i}]") for i, c in enumerate(raw)]
        return ScalarTerm.polynomial(coeffs)
    if kind in ("exp_scaled", "exp_minus_one"):
        return ScalarTerm(kind, a=_as_complex(_require(d, "a", where), where + ".a"))
    if kind == "sqrt_principal":
        return ScalarTerm.sqrt_principal()
    if kind == "rational_pole":
        return ScalarTerm.rational_pole(_as_complex(_require(d, "xi", where), where + ".xi"))
    raise ParseError(f"{where}.kind: unknown scalar kind {kind!r}")


def _parse_matrix(raw, n, where):
    if not isinstance(raw, list):
        raise ParseError(f"{where}: expected a list of rows")
    mat = np.zeros((len(raw), len(raw[0]) if raw else 0), dtype=complex)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != len(raw[0]):
            raise ParseError(f"{where}[{i}]: ragged matrix rows")
        for j, entry in enumerate(row):
            mat[i, j] = _as_complex(entry, f"{where}[{i}][{j}]")
    if mat.shape != (n, n):
        raise DimensionMismatch(f"{where}: shape {mat.shape} does not match n={n}")
    return mat


def parse_problem(text):
    """Parse a problem file (UTF-8 JSON contents) into a MatFun.

    Two layouts: split form {"n", "domain", "terms": [{"scalar", "matrix"}]}
    with complex entries as [re, im] pairs, or a named builtin
    {"builtin": "resonance", "params": {"V0", "a", "b", ...}}.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level: expected an object")

    if "nlevp" in doc:
        from .problems import nlevp_from_dict

        return nlevp_from_dict(doc)

    if "builtin" in doc:
        name = doc["builtin"]
        if name != "resonance":
            raise ParseError(f"builtin: unknown builtin {name!r}")
        from .problems.resonance import ResonanceConfig, resonance_T

        params = doc.get("params", {})
        if not isinstance(params, dict):
            raise ParseError("params: expected an object")
        try:
            cfg = ResonanceConfig(**params)
        except TypeError as e:
            raise ParseError(f"params: {e}") from None
        return resonance_T(cfg)

    n = _require(doc, "n", "top level")
    if not isinstance(n, int) or n < 1:
        raise ParseError(f"n: expected a positive integer, got {n!r}")
    domain = Domain.from_dict(_require(doc, "domain", "top level"))
    raw_terms = _require(doc, "terms", "top level")
    if not isinstance(raw_terms, list) or not raw_terms:
        raise ParseError("terms: expected a nonempty list")
    terms = []
    for i, t in enumerate(raw_terms):
        where = f"terms[{i}]"
        f = _parse_scalar(_require(t, "scalar", where), where + ".scalar")
        a = _parse_matrix(_require(t, "matrix", where), n, where + ".matrix")
        terms.append((f, a))
    return SplitMatFun(n, terms, domain=domain)
