from __future__ import annotations

from typing import Any


class NcupError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(NcupError):
    pass


class CheckFailure(NcupError):
    """A mathematical check did not hold within tolerance."""


# Group axioms


class GroupAxiomError(NcupError):
    axiom: str = "group axiom"

    def __init__(self, witness: tuple[int, ...], detail: str = "") -> None:
        self.witness = witness
        msg = f"{self.axiom} fails at {witness}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NotLatinSquare(GroupAxiomError):
    axiom = "latin square"


class NoIdentity(GroupAxiomError):
    axiom = "identity"


class NoInverse(GroupAxiomError):
    axiom = "inverse"


class NotAssociative(GroupAxiomError):
    axiom = "associativity"


# Sizes and model support


class UnsupportedSize(NcupError):
    pass


class GroupTooLarge(NcupError):
    pass


class SizeTooLarge(NcupError):
    pass


class UnsupportedModel(NcupError):
    pass


class ModelMismatch(NcupError):
    pass


# Algebra


class AlgebraMismatch(NcupError):
    pass


class NotInAlgebra(NcupError):
    pass


class SideMismatch(NcupError):
    pass


class NotSelfAdjoint(NcupError):
    pass


class NoConvergence(NcupError):
    pass


class InvalidExponent(NcupError):
    pass


class InvalidExponents(NcupError):
    pass


# Extremizers


class InvalidCharacter(NcupError):
    pass


class NotAProjection(NcupError):
    pass


class ShiftSideMismatch(NcupError):
    pass


class ZeroElement(NcupError):
    pass


class MismatchedBiprojection(NcupError):
    pass


class PreconditionFailed(NcupError):
    def __init__(self, predicate: str, **residuals: Any) -> None:
        self.predicate = predicate
        self.residuals = residuals
        extra = ", ".join(f"{k}={v:.3g}" for k, v in residuals.items())
        super().__init__(f"precondition '{predicate}' failed" + (f" ({extra})" if extra else ""))
