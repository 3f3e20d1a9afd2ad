"""Exception types shared across the package."""


class NlevolError(RuntimeError):
    """Base class for failures the command line maps to exit code 2."""


class IllConditionedOperatorError(NlevolError):
    """A shifted system (A - ik I) is singular or numerically close to it.

    Raised before the solve is attempted, based on the distance from the
    spectrum to the shift.
    """


class TermBudgetError(NlevolError):
    """The truncation rule was not satisfied within the term budget."""

    def __init__(self, message, ell_per_point=None):
        super().__init__(message)
        self.ell_per_point = ell_per_point


class MeshBudgetError(NlevolError):
    """Mesh refinement of a boundary value solve did not converge."""


class ConvergenceFailure(NlevolError):
    """A computed approximation is unusable (relative error above one)."""
