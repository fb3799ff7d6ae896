"""Numerical laboratory for fourth-order degenerate thin-film equations
with power-law and Ellis rheology."""

__version__ = "0.1.0"

from .model import (NO_REG, PSI_PRIME_CAP, Regularisation, Rheology,
                    flux_density, flux_linearisation, psi, psi_sigma,
                    psi_sigma_prime)
from .spatial import (FilmState, Grid, energy_gradient, face_height,
                      face_third_difference, rhs)
from .functionals import (Diagnostics, dissipation, energy,
                          h1_distance_to_mean, mass, poincare_quotient)
from .timestep import IntegratorConfig, integrate, stable_dt_estimate
from .trajectory import Termination, Trajectory

__all__ = [
    "NO_REG", "PSI_PRIME_CAP", "Regularisation", "Rheology",
    "flux_density", "flux_linearisation", "psi", "psi_sigma",
    "psi_sigma_prime",
    "FilmState", "Grid", "energy_gradient", "face_height",
    "face_third_difference", "rhs",
    "Diagnostics", "dissipation", "energy", "h1_distance_to_mean", "mass",
    "poincare_quotient",
    "IntegratorConfig", "integrate", "stable_dt_estimate",
    "Termination", "Trajectory",
    "__version__",
]
