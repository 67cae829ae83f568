"""Fast direct solvers for difference boundary-value problems.

A perturbation of small rank changes the resolvent by a correction that only
needs a small dense solve.  Difference operators that differ only in their
boundary conditions differ by such a perturbation, so a problem with any
boundary condition can be solved with the FFT-diagonal periodic resolvent
plus a boundary-sized system.
"""

__version__ = "0.1.0"

from .difference_ops import (
    ExtensionOperator,
    Geometry,
    GridFunction,
    GridPartition,
    LAPLACIAN_1D,
    LAPLACIAN_2D,
    Stencil,
    assemble_extended,
    classify,
    epsilon_of,
    periodic_extension,
    perturbation_between,
    third_kind_extension,
)
from .errors import (
    KreinError,
    LambdaOnSpectrum,
    ResonantRankOne,
    SingularBoundarySystem,
    SingularMatrix,
)
from .krein import (
    DenseResolvent,
    KreinResolvent,
    build_boundary_system,
    krein_solve,
    rank1_correction_inverse,
    solve_with_system,
)
from .laplace import (
    BvpSolver,
    DefectProblem,
    DefectSolver,
    periodic_resolvent_1d,
    periodic_resolvent_2d,
    solve_bvp,
    solve_defect,
    sweep_solve_tridiagonal,
)
from .lowrank import LowRankPerturbation
