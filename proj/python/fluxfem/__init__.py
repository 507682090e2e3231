"""fluxfem: linear finite elements on boundary-concentrated meshes.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface: sector domains, newest-vertex-bisection meshes, Poisson
solves, the two normal-derivative approximations, the Dirichlet boundary
control solver, and the convergence-study drivers.
"""

from ._fluxfem import (
    BoundaryFunction,
    ControlBenchmark,
    ControlSolution,
    EdgeFlux,
    FeFunction,
    FluxBenchmark,
    Mesh,
    SectorDomain,
    bisect,
    classical_flux,
    control_bench,
    control_errors,
    element_distance_to_boundary,
    flux_bench,
    flux_error_l2,
    initial_mesh,
    refine_graded,
    run_control_study,
    run_flux_study,
    sector_domain,
    solve_control,
    solve_dirichlet,
    variational_flux,
)

__all__ = [
    "BoundaryFunction",
    "ControlBenchmark",
    "ControlSolution",
    "EdgeFlux",
    "FeFunction",
    "FluxBenchmark",
    "Mesh",
    "SectorDomain",
    "bisect",
    "classical_flux",
    "control_bench",
    "control_errors",
    "element_distance_to_boundary",
    "flux_bench",
    "flux_error_l2",
    "initial_mesh",
    "refine_graded",
    "run_control_study",
    "run_flux_study",
    "sector_domain",
    "solve_control",
    "solve_dirichlet",
    "variational_flux",
]

__version__ = "0.1.0"
