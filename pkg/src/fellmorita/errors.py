"""Exception hierarchy for the toolkit.

Verification predicates never raise: their failures are report entries.
Exceptions signal inputs a construction cannot work with.
"""
from __future__ import annotations

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from fellmorita.reports.models import Report


class FellMoritaError(Exception):
    """Base class for every toolkit error."""


class ReportedError(FellMoritaError):
    """An error that carries the report explaining it."""

    def __init__(self, message: str, report: Optional["Report"] = None) -> None:
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------
# groups and matrix spaces
# ---------------------------------------------------------------------
class NotAGroup(FellMoritaError):
    pass


class ShapeMismatch(FellMoritaError, ValueError):
    pass


class NoUnit(FellMoritaError):
    pass


class NotASubalgebra(FellMoritaError):
    pass


class NotPositiveDefinite(FellMoritaError):
    pass


# ---------------------------------------------------------------------
# bundles and bimodules
# ---------------------------------------------------------------------
class NotSaturated(FellMoritaError):
    pass


class NotSaturatedAt(NotSaturated):
    def __init__(self, element: int, message: str = "") -> None:
        super().__init__(message or f"bundle is not saturated at t={element}")
        self.element = element


class NotInTotalAlgebra(FellMoritaError):
    pass


class MiddleAlgebraMismatch(FellMoritaError):
    pass


class AssemblyFailure(ReportedError):
    pass


class IncompatibleActions(FellMoritaError):
    pass


# ---------------------------------------------------------------------
# basic construction and reconstruction
# ---------------------------------------------------------------------
class DegenerateForm(FellMoritaError):
    pass


class IllDefinedExtension(FellMoritaError):
    pass


class IsomorphismFailure(ReportedError):
    pass


class CovarianceViolation(FellMoritaError):
    pass


class EmptyFiber(FellMoritaError):
    pass


class NoAutomorphismFound(FellMoritaError):
    pass


# ---------------------------------------------------------------------
# involutive bimodules
# ---------------------------------------------------------------------
class WrongGroup(FellMoritaError):
    pass


class IllDefinedInvolution(FellMoritaError):
    pass


class NotAnInvolutiveIsomorphism(ReportedError):
    pass


class ClosureFailure(FellMoritaError):
    pass


class LinkingError(ReportedError):
    pass


# ---------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------
class ParseError(FellMoritaError):
    pass


class UnresolvedReference(FellMoritaError):
    pass


class UnknownDemo(FellMoritaError):
    pass
