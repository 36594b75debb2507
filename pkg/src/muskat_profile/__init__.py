"""Self-similar interface profiles for thin-film gravity-driven flow.

Constructs radially symmetric profiles k_s that solve the stationary
self-similar equation

    (L - y . grad + 1) k = T[k],        L = (-Laplacian)^{1/2},

as a fixed point of a contraction acting on the spectral correction g:
k_s = klin_s + J[g], where klin_s is the closed-form solution of the
linear part with forcing and J inverts the Laplacian radially.  The
package exposes the radial field and Hankel-transform infrastructure,
the linear operators (fractional Laplacian, resolvent, inverse
Laplacian), the renormalized nonlinear functionals, the solver, and a
CLI for running and verifying the scheme.
"""

__version__ = "0.1.0"

from .grids import (  # noqa: F401
    ParameterError,
    RadialField,
    RadialGrid,
    TailModel,
    WeightedNormSpec,
    make_log_grid,
    radial_gradient,
    weighted_linf,
)
from .hankel import (  # noqa: F401
    SobolevSpec,
    SpectralField,
    SpectralTailModel,
    hankel_forward,
    hankel_inverse,
    intersection_norm,
)
from .nonlinear import (  # noqa: F401
    EstimatedValue,
    ProfileArgument,
    QuadratureSpec,
    evaluate_Q,
    evaluate_R,
    evaluate_T,
    evaluate_T1,
    evaluate_T_ge2,
    evaluate_T_grid,
    finite_slope,
)
from .operators import (  # noqa: F401
    frac_laplacian_constant,
    frac_laplacian_pv,
    frac_laplacian_spectral,
    inverse_laplacian_J,
    linear_part_residual,
    resolvent_L,
)
from .profile import LinearProfile, klin_field, klin_spectral  # noqa: F401
from .solver import (  # noqa: F401
    ProfileState,
    ResidualReport,
    RunDiagnostics,
    SolverConfig,
    SweepReport,
    default_config,
    fixed_point_map,
    forcing_phi,
    initial_state,
    profile_residual,
    solve,
    sweep_s,
)
