"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: validation/domain problems exit 2,
numerical failures (convergence, multiplicity, infeasibility) exit 3.
"""


class LandauPinError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LandauPinError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ValidationError(LandauPinError, ValueError):
    """Structured input (JSON, problem description) violates its schema."""


class MultiplicityError(LandauPinError, RuntimeError):
    """Zero or several eigenvalues found where exactly one is guaranteed."""


class ConvergenceError(LandauPinError, RuntimeError):
    """An iterative procedure hit its cap without meeting its tolerance."""


class StructureError(LandauPinError, RuntimeError):
    """A matrix that should be invertible by construction is singular."""


class InfeasibleError(LandauPinError, RuntimeError):
    """No admissible step exists (e.g. the sup-norm wall is hit)."""


class EvidenceError(LandauPinError, RuntimeError):
    """A strict-sign assertion of a splitting scan failed above the floor."""
