"""Exception hierarchy shared across the package.

Two families matter to callers: ``UsageError`` subclasses signal malformed
input (bad files, bad flags) and map to CLI exit code 2; ``NumericalError``
subclasses signal that a computation could not be completed or certified
and map to CLI exit code 3.
"""


class UsageError(Exception):
    """Malformed input: files, parameters, problem declarations."""


class ParseError(UsageError):
    """Problem or config file does not parse; message carries line/field."""


class DimensionMismatch(UsageError):
    """Declared dimension disagrees with supplied matrix shapes."""


class NumericalError(Exception):
    """A computation failed or its certificate could not be established."""


class DomainError(NumericalError):
    """Evaluation requested outside the function's domain (e.g. on a cut)."""


class SingularOnContour(NumericalError):
    """sigma_min dropped below tolerance at a contour evaluation point."""


class NoConvergence(NumericalError):
    """Iteration or adaptive refinement exceeded its budget."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics


class FlaggedComponent(NumericalError):
    """Contour extraction requested for an unbounded/cut-touching component."""


class SingularJacobian(NumericalError):
    """Bordered Newton Jacobian singular even after border restarts."""


class DomainExit(NumericalError):
    """Newton iterate left the function's domain."""


class SingularPencil(NumericalError):
    """det(A - zB) vanishes identically; the pencil is not regular."""


class DefectiveMatrix(NumericalError):
    """Eigenbasis too ill-conditioned for the requested bound."""


class IllConditionedLeadingCoeff(NumericalError):
    """Leading Chebyshev coefficient matrix is numerically singular."""


class DefectiveColleague(NumericalError):
    """Colleague eigendecomposition residual exceeds its certificate bound."""


class ZeroDerivative(NumericalError):
    """Taylor disk bound undefined: the linearization coefficient b is 0."""


class NotSPD(UsageError):
    """Supplied matrix is not symmetric positive definite."""


class PencilNotDefinite(NumericalError):
    """(B, A) is not a definite pencil; no A-orthonormal eigenbasis."""


class NotRankOne(UsageError):
    """Supplied matrix has more than one nonneglible singular value."""


class NotCompanion(UsageError):
    """Supplied matrix is not in companion form."""


class NilpotentA1(NumericalError):
    """Rank-one delay matrix has zero eigenvalue; no basis transform."""


class TrailingBlockDefective(NumericalError):
    """Compressed trailing block is defective; cannot be diagonalized."""


class GuardFailed(NumericalError):
    """A certification guard (sigma_min margin on a contour) failed."""
