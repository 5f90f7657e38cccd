"""Dual-pairing summation-by-parts operators with dispersion-optimised
interiors, convex boundary closures, and a small wave-propagation bench.

The usual entry points:

    get_operator / get_interior     shipped operators and stencil tables
    assemble, verify_sbp, ...       dense realization and validation
    dispersion_upwind, error_report Fourier-symbol dispersion analysis
    optimize, build_family          interior-coefficient optimization
    build_problem, admm_solve       boundary-closure solver
    SimConfig, simulate             wave system runs
"""

from .operators import (
    InteriorStencil,
    CentralStencil,
    BoundaryClosure,
    DualPairOperator,
    build_upwind_interior,
    build_drp_interior,
    build_central_interior,
    minus_stencil,
    assemble,
    assemble_periodic,
    verify_sbp,
    verify_upwind,
    verify_accuracy,
    load_operator,
    save_operator,
    operator_from_dict,
    operator_to_dict,
    list_builtin_operators,
    list_builtin_interiors,
    get_interior,
    get_operator,
)
from .dispersion import (
    SymbolPolynomial,
    DispersionCurve,
    ErrorReport,
    symbol,
    dispersion_upwind,
    dispersion_central,
    error_report,
    phase_velocity,
    refinement_factor,
    detect_swm,
)
from .optimizer import (
    FamilySpec,
    OptimizerResult,
    build_family,
    optimize,
    weighted_variant,
    toy_example,
)
from .closure import (
    ClosureProblem,
    ClosureResult,
    build_problem,
    admm_solve,
)
from .wavesim import (
    Grid1D,
    WaveState,
    SimConfig,
    SimResult,
    simulate,
    rhs,
    rk4_step,
)
from . import numkernel, operators, dispersion, optimizer, closure, wavesim

__version__ = "0.1.0"
