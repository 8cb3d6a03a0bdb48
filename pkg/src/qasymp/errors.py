"""Exception hierarchy shared by every module."""


class QAsympError(Exception):
    """Base class for all library errors."""


class DomainError(QAsympError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class BranchError(DomainError):
    """A principal-branch power was requested at a branch point."""


class PoleError(DomainError):
    """Evaluation at a pole."""


class NonConvergent(QAsympError):
    """Truncation could not reach the requested tolerance within ``max_terms``."""


class HypothesisViolated(QAsympError):
    """A lemma's hypothesis does not hold, so its bound may not be used."""


class InternalDisagreement(QAsympError):
    """Two independent evaluation routes disagree beyond their certificates."""


class NotApplicable(QAsympError):
    """An error bound formula is outside its range of validity at this ``n``."""


class CaseNotStated(QAsympError):
    """The requested (family, case) pair has no statement to verify."""


class NotFound(QAsympError):
    """A finite scan window contained no qualifying index."""


class NoSolution(QAsympError):
    """A system of congruences has no solution."""


class QuadratureNotConverged(QAsympError):
    """Successive quadrature refinements did not agree."""
