"""Exception hierarchy.

Two families: ``InputError`` for bad distributions, parameters and configs
(CLI exit code 2) and ``NumericalError`` for failures of an algorithm on
valid input (CLI exit code 3).
"""

from __future__ import annotations


class TailpoleError(Exception):
    """Base class for all package errors."""


class InputError(TailpoleError, ValueError):
    pass


class NumericalError(TailpoleError, ArithmeticError):
    pass


# distkit
class NegativeMass(InputError):
    pass


class NotNormalized(InputError):
    pass


class ZeroVariance(InputError):
    pass


class LatticePeriodic(InputError):
    def __init__(self, gcd: int):
        super().__init__(f"support lies on a lattice with span {gcd}; span 1 required")
        self.gcd = gcd


class BranchAmbiguity(NumericalError):
    pass


# scaling
class Unstable(InputError):
    pass


class DegreeTooSmall(InputError):
    pass


# roots
class NoConvergence(NumericalError):
    def __init__(self, index: int, message: str = ""):
        super().__init__(message or f"Newton iteration failed for index {index}")
        self.index = index


class Collision(NumericalError):
    pass


class OrderViolation(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class PhaseJump(NumericalError):
    pass


# exact
class TooLarge(InputError):
    pass


class BeyondTruncation(NumericalError):
    pass


class OutsideDomain(InputError):
    pass


class QuadratureStall(NumericalError):
    pass


# dpa / grw
class OnContour(InputError):
    pass


class PoleHit(NumericalError):
    pass


class DomainError(InputError):
    pass


class OutOfRange(InputError):
    pass
