"""Discretized singularly perturbed 1-D energies: surface tensions,
jump-energy constants and sharp-interface checks."""

__version__ = "0.1.0"

from .energy import FunctionalSpec, energy, gradient, scaling_identity_check  # noqa: E402
from .grid import GridFunction, ProfileGrid, TailSpec, constant_tails, make_grid  # noqa: E402
from .kernel import kernel_matrix, scale_factor, seminorm  # noqa: E402
from .potential import Potential, validate  # noqa: E402
from .solver import SolverOptions, init_profile, minimize, multi_start  # noqa: E402
from .tension import (TensionProblem, TensionResult, equipartition_reference,  # noqa: E402
                      hermite_reference, solve_profile)

__all__ = [
    "FunctionalSpec", "GridFunction", "Potential", "ProfileGrid", "SolverOptions",
    "TailSpec", "TensionProblem", "TensionResult", "constant_tails", "energy",
    "equipartition_reference", "gradient", "hermite_reference", "init_profile",
    "kernel_matrix", "make_grid", "minimize", "multi_start", "scale_factor",
    "scaling_identity_check", "seminorm", "solve_profile", "validate",
]
