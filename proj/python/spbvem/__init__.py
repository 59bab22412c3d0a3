"""Equal-order stabilized virtual elements for Stokes coupled to Poisson-Boltzmann."""

from ._core import (
    GeometryError,
    Mesh,
    SolverError,
    ValidationError,
    __version__,
    composite_mesh,
    convergence,
    dof_count,
    family_mesh,
    observed_rate,
    read_mesh,
    solve,
    write_mesh,
)

__all__ = [
    "GeometryError",
    "Mesh",
    "SolverError",
    "ValidationError",
    "__version__",
    "composite_mesh",
    "convergence",
    "dof_count",
    "family_mesh",
    "observed_rate",
    "read_mesh",
    "solve",
    "write_mesh",
]
