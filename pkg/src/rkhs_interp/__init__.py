"""Minimum-norm interpolation with reproducing kernels.

Lagrange, Taylor, Bezier-Bernstein and odd-degree spline interpolants are all
obtained by one solver applied to different kernels.
"""

from .algebra import (
    add_kernels,
    kernel_from_dict,
    scale_kernel,
    schur_product,
    second_difference_kernel,
    tensor_kernel,
)
from .engine import (
    Functional,
    Interpolant,
    InterpolationProblem,
    assemble_gram,
    eval_interpolant,
    interpolant_norm_sq,
    solve_min_norm,
    verify_constraints,
)
from .errors import (
    CapabilityError,
    DomainError,
    InfeasibleError,
    MembershipError,
    ParameterError,
    RankDeficiencyError,
)
from .kernels import Kernel, construct_kernel, eval_kernel, eval_kernel_partial

__version__ = "0.1.0"
