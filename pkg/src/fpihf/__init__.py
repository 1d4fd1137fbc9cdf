"""Forward-partial inverse-half-forward splitting and TV least-squares benchmarks."""

from .baselines import CondatVuConfig, condat_vu_autoconfig, condat_vu_solve, fpif_solve
from .estimators import BoxTVRegression
from .exceptions import ConfigurationError, DivergenceError, InnerSolveError
from .opcore import CocoerciveMap, LipschitzMap, chi, operator_norm, project_box, prox_l1
from .problems import ProblemInstance, generate_instance, objective, read_instance, write_instance
from .solvers import (
    CompositeBlock,
    DualBlock,
    SolverReport,
    StepSchedule,
    Termination,
    composite_opt_solve,
    fbhf_solve,
    fixed_point_certificate,
    fpihf_general_solve,
    fpihf_solve,
    lstv_solve,
    primal_dual_solve,
)
from .subspace import KernelFactorization, SubspaceProjector, projector_from_basis, projector_from_kernel

__version__ = "0.1.0"

__all__ = [
    "BoxTVRegression",
    "CocoerciveMap",
    "CompositeBlock",
    "CondatVuConfig",
    "ConfigurationError",
    "DivergenceError",
    "DualBlock",
    "InnerSolveError",
    "KernelFactorization",
    "LipschitzMap",
    "ProblemInstance",
    "SolverReport",
    "StepSchedule",
    "SubspaceProjector",
    "Termination",
    "chi",
    "composite_opt_solve",
    "condat_vu_autoconfig",
    "condat_vu_solve",
    "fbhf_solve",
    "fixed_point_certificate",
    "fpif_solve",
    "fpihf_general_solve",
    "fpihf_solve",
    "generate_instance",
    "lstv_solve",
    "objective",
    "operator_norm",
    "primal_dual_solve",
    "project_box",
    "projector_from_basis",
    "projector_from_kernel",
    "prox_l1",
    "read_instance",
    "write_instance",
]
