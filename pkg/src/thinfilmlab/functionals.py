"""Discrete energy, dissipation, mass and related diagnostics.

All functionals use the same face-based differences as the spatial operator,
which is what makes the semidiscrete energy-dissipation identity close
exactly (see :mod:`thinfilmlab.spatial`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedQuotientError
from .model import Regularisation, Rheology, NO_REG
from .spatial import FilmState, Grid, face_flux, face_third_difference


@dataclass(frozen=True)
class Diagnostics:
    """One row of trajectory diagnostics."""

    t: float
    energy: float
    dissipation: float
    mass: float
    min_height: float
    max_height: float
    h1_dist: float

    def __post_init__(self):
        if self.energy < 0 or self.dissipation < 0:
            raise ValueError("energy and dissipation must be nonnegative")
        if self.min_height > self.max_height:
            raise ValueError("min_height exceeds max_height")


def energy(state: FilmState) -> float:
    """Discrete Dirichlet energy ``0.5 * sum_faces h * ((du)/h)**2``.

    Zero exactly iff the state is constant.
    """
    d = np.diff(state.u)
    return 0.5 * float(np.dot(d, d)) / state.grid.h


def mass(state: FilmState) -> float:
    """Total film volume ``h * sum(u)``."""
    return state.grid.h * float(np.sum(state.u))


def dissipation(state: FilmState, rheo: Rheology,
                reg: Regularisation = NO_REG) -> float:
    """Discrete dissipation ``h * sum_interior_faces flux * w``.

    Nonnegative for every admissible state because the flux nonlinearity is
    odd and monotone; zero iff all interior third differences vanish.
    """
    w = face_third_difference(state)
    flux = face_flux(state, rheo, reg)
    return state.grid.h * float(np.dot(flux[1:-1], w[1:-1]))


def mean_height(state: FilmState) -> float:
    return float(np.sum(state.u)) / state.n_cells


def h1_norm(grid: Grid, v: np.ndarray) -> float:
    """Discrete H1 norm of nodal values (L2 part plus gradient part)."""
    v = np.asarray(v, dtype=np.float64)
    d = np.diff(v)
    l2 = grid.h * float(np.dot(v, v))
    grad = float(np.dot(d, d)) / grid.h
    return float(np.sqrt(l2 + grad))


def h1_distance_to_mean(state: FilmState) -> float:
    """H1 distance between the state and its own mean height."""
    return h1_norm(state.grid, state.u - mean_height(state))


def lp_face_norm_third_difference(state: FilmState, p: float) -> float:
    """Discrete L_p norm of the third difference evaluated at faces."""
    w = face_third_difference(state)
    return float((state.grid.h * np.sum(np.abs(w[1:-1]) ** p)) ** (1.0 / p))


def poincare_quotient(state: FilmState, alpha: float) -> float:
    """Ratio ``E[v] / ||w||_{alpha+1}**2`` for the deviation from the mean.

    Invariant under scaling of the deviation; undefined for constant states.
    """
    e = energy(state)
    denom = lp_face_norm_third_difference(state, alpha + 1.0) ** 2
    if e == 0.0 or denom == 0.0:
        raise UndefinedQuotientError(
            "Poincare quotient undefined for states with zero deviation")
    return e / denom
