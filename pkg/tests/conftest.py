"""Shared fixtures: reference grids, quadrature, and the solves reused
across test modules.

The two solves are session-scoped because they dominate the suite's
runtime: ``baseline`` is the full-resolution reference run (the object
under test for the convergence, residual, and cross-representation
criteria) and ``coarse_solution`` is a cheaper run used by tests that
only need *a* converged state (tampering, serialization, orderings).
"""

from types import SimpleNamespace

import pytest

from muskat_profile import (
    QuadratureSpec,
    SolverConfig,
    default_config,
    fixed_point_map,
    make_log_grid,
    solve,
)


@pytest.fixture(scope="session")
def phys_grid():
    return make_log_grid(1e-3, 1e3, 241)


@pytest.fixture(scope="session")
def freq_grid():
    return make_log_grid(1e-3, 1e3, 241)


@pytest.fixture(scope="session")
def quad():
    return QuadratureSpec()


def coarse_config(s: float = 0.05, **overrides) -> SolverConfig:
    """Reduced-cost solver configuration that still satisfies the
    solver's internal spectral/physical consistency tolerances
    (61-node grids do not; 121 nodes over the full range do)."""
    kwargs = dict(
        physical_grid=make_log_grid(1e-3, 1e3, 121),
        frequency_grid=make_log_grid(1e-3, 1e3, 121),
        quadrature=QuadratureSpec(a_min=1e-3, a_max=1e3, n_theta=32, n_radial=96),
        max_iterations=8,
        tolerance=1e-13,
        s=s,
        t1=1.75,
    )
    kwargs.update(overrides)
    return SolverConfig(**kwargs)


@pytest.fixture(scope="session")
def baseline():
    """Reference solve at s = 0.05, t1 = 1.75, default resolution."""
    config = default_config(s=0.05, t1=1.75)
    state, diag = solve(0.05, 1.75, config)
    return SimpleNamespace(state=state, diag=diag, config=config)


@pytest.fixture(scope="session")
def baseline_extra_map(baseline):
    """One additional application of the map to the converged state."""
    return fixed_point_map(baseline.state, baseline.config)


@pytest.fixture(scope="session")
def coarse_solution():
    config = coarse_config(s=0.05)
    state, diag = solve(0.05, 1.75, config)
    return SimpleNamespace(state=state, diag=diag, config=config)
