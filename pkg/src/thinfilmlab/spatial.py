"""Cell-centred grid, mirror-extension difference operators and the
conservative semidiscrete right-hand side.

Layout.  ``n_cells`` cells of width ``h`` tile the interval; heights live at
cell centres, fluxes at the ``n_cells + 1`` faces.  The wall conditions
``u_x = u_xxx = 0`` are encoded twice over: ghost cells mirror the interior
(``u[-1] = u[0]``, ``u[n] = u[n-1]``), which annihilates odd derivatives at
the walls, and the two boundary faces carry zero flux outright.

These two choices are coupled with the functionals on purpose: first
differences at faces define the discrete energy, the compact 4-point third
difference defines ``w`` at faces, and the difference of mirror-ghost second
differences at neighbouring cells equals ``h**2 * w`` at the face between
them.  Double summation by parts with vanishing boundary fluxes then closes

    <dE/du, du/dt> + dissipation = 0

exactly (to round-off), the semidiscrete shadow of the continuous
energy-dissipation identity.  Mass conservation is exact as well because the
right-hand side is a telescoping flux difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneracyError
from .model import Regularisation, Rheology, NO_REG, flux_density


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred mesh on a bounded interval."""

    x_left: float
    x_right: float
    n_cells: int

    def __post_init__(self):
        if not self.x_left < self.x_right:
            raise ValueError("x_left must be smaller than x_right")
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")

    @property
    def h(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    def cell_centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.h

    def faces(self) -> np.ndarray:
        return self.x_left + np.arange(self.n_cells + 1) * self.h


@dataclass(frozen=True)
class FilmState:
    """Positive film heights at the cell centres of a grid."""

    grid: Grid
    u: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.float64)
        if u.shape != (self.grid.n_cells,):
            raise ValueError(
                f"state needs {self.grid.n_cells} values, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("film heights must be finite")
        if np.any(u <= 0.0):
            raise DegeneracyError("film heights must be strictly positive")
        object.__setattr__(self, "u", u)

    @property
    def n_cells(self) -> int:
        return self.grid.n_cells

    def reversed(self) -> "FilmState":
        return FilmState(self.grid, self.u[::-1].copy())


def face_third_difference(state: FilmState) -> np.ndarray:
    """Third difference of the heights at faces, zero at the two walls.

    Interior face ``j`` (between cells ``j-1`` and ``j``) carries
    ``(u[j+1] - 3u[j] + 3u[j-1] - u[j-2]) / h**3`` with mirror ghosts; the
    stencil is exact on cubics away from the walls.
    """
    u = state.u
    n = u.size
    if n < 4:
        raise ValueError("face_third_difference needs at least 4 cells")
    h3 = state.grid.h ** 3
    ue = np.concatenate((u[:1], u, u[-1:]))  # mirror ghosts
    w = np.zeros(n + 1)
    w[1:-1] = (ue[3:] - 3.0 * ue[2:-1] + 3.0 * ue[1:-2] - ue[:-3]) / h3
    return w


def face_height(state: FilmState) -> np.ndarray:
    """Heights localised at faces: arithmetic mean inside, copy at walls."""
    u = state.u
    fh = np.empty(u.size + 1)
    fh[1:-1] = 0.5 * (u[:-1] + u[1:])
    fh[0] = u[0]
    fh[-1] = u[-1]
    return fh


def face_flux(state: FilmState, rheo: Rheology,
              reg: Regularisation = NO_REG) -> np.ndarray:
    """Flux at every face; identically zero at the two boundary faces."""
    w = face_third_difference(state)
    fh = face_height(state)
    flux = flux_density(fh, w, rheo, reg)
    flux[0] = 0.0
    flux[-1] = 0.0
    return flux


def rhs(state: FilmState, rheo: Rheology,
        reg: Regularisation = NO_REG) -> np.ndarray:
    """Semidiscrete time derivative ``du/dt = -(F[j+1] - F[j]) / h``.

    The flux difference telescopes, so the entries sum to zero up to
    round-off for every admissible state.
    """
    flux = face_flux(state, rheo, reg)
    return -np.diff(flux) / state.grid.h


def energy_gradient(state: FilmState) -> np.ndarray:
    """Gradient of the discrete energy with respect to the cell heights.

    Equals minus ``h`` times the mirror-ghost second difference; its entries
    sum to zero because the energy ignores constant shifts.
    """
    u = state.u
    h = state.grid.h
    g = np.empty_like(u)
    g[1:-1] = (2.0 * u[1:-1] - u[:-2] - u[2:]) / h
    g[0] = (u[0] - u[1]) / h
    g[-1] = (u[-1] - u[-2]) / h
    return g
