"""Exception hierarchy shared by all sabetti modules.

Every error that maps to a CLI exit code carries an ``exit_code`` class
attribute: 2 for input errors, 3 for non-convergence, 4 for internal
consistency failures.
"""

from __future__ import annotations


class SabettiError(Exception):
    exit_code = 1


class InputError(SabettiError):
    exit_code = 2


class ConvergenceError(SabettiError):
    """Raised when a refinement loop hit its configured limit."""

    exit_code = 3

    def __init__(self, message: str, partial_report=None):
        super().__init__(message)
        self.partial_report = partial_report


class ConsistencyError(SabettiError):
    """An invariant that should hold by construction was violated."""

    exit_code = 4


# exact_algebra
class ZeroPolynomial(InputError):
    pass


class NotIsolating(InputError):
    pass


class DegenerateDegree(InputError):
    pass


class DimensionMismatch(InputError):
    pass


# formula_core
class FormulaSyntaxError(InputError):
    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class ArityError(InputError):
    pass


# gv_closure / covering
class ScheduleTooShort(InputError):
    pass


class NotPClosed(InputError):
    pass


class NotInSet(InputError):
    pass


class UnboundedSet(InputError):
    pass


class CoverageGap(ConvergenceError):
    pass


class ContractibilityUnverified(ConvergenceError):
    pass


# mayer_vietoris
class ResolutionExhausted(ConvergenceError):
    pass


class AmbiguousInclusion(ConsistencyError):
    pass


class IncompleteIncidence(ConsistencyError):
    pass


class NegativeBetti(ConsistencyError):
    pass


# cubical_oracle
class DimensionUnsupported(InputError):
    pass


# roadmap2d
class OddDegree(InputError):
    pass


class DegreeTooSmall(InputError):
    pass


class NotStabilized(ConvergenceError):
    pass


class BranchMatchFailure(ConvergenceError):
    pass


class NonBoundedCurve(InputError):
    pass


class PointNotOnCurve(InputError):
    pass
