"""Series solver for dv/dt = A v closed by a prescribed time average.

The solution of the problem

    dv/dt = A v  on (0, 2 pi),    (1/(2 pi)) integral_0^{2 pi} v dt = f,

is expanded into a Bernoulli polynomial part plus a trigonometric tail
whose coefficients solve shifted linear systems, truncated adaptively.
Operator backends cover diagonal, second difference, banded circulant and
unitary Hessenberg matrices, plus two routes for parabolic problems.
"""

from .backends import (
    CirculantOperator,
    DiagonalOperator,
    HessenbergOperator,
    LaplacianOperator,
    band_probe,
    make_data,
    power_reference,
    reference_solution,
)
from .errors import (
    ConvergenceFailure,
    IllConditionedOperatorError,
    MeshBudgetError,
    NlevolError,
    TermBudgetError,
)
from .expansion import (
    AdaptiveResult,
    adaptive_solve,
    error_measure,
    evaluate_series,
    fine_grid,
)
from .pde import (
    ParabolicProblem,
    functional_solve,
    model_problem_1,
    model_problem_2,
    mol_solve,
    semidiscretize,
)
from .special import BernoulliTable, psi1

__version__ = "0.1.0"

__all__ = [
    "AdaptiveResult",
    "BernoulliTable",
    "CirculantOperator",
    "ConvergenceFailure",
    "DiagonalOperator",
    "HessenbergOperator",
    "IllConditionedOperatorError",
    "LaplacianOperator",
    "MeshBudgetError",
    "NlevolError",
    "ParabolicProblem",
    "TermBudgetError",
    "adaptive_solve",
    "band_probe",
    "error_measure",
    "evaluate_series",
    "fine_grid",
    "functional_solve",
    "make_data",
    "model_problem_1",
    "model_problem_2",
    "mol_solve",
    "power_reference",
    "psi1",
    "reference_solution",
    "semidiscretize",
]
