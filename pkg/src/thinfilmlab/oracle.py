"""Independent brute-force verifiers.

Nothing in here shares discretisation code with the primary path: the
quadrature oracle works on closed-form profiles in the continuum, and the
reference integrator re-derives the scheme from scratch (repeated first
differences instead of the compact stencil, classical fixed-step RK4 instead
of the embedded pair, a doubled grid restricted back by cell-pair
averaging).  These are deliberately slow and simple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import OracleFailureError
from .model import ELLIS, NEWTONIAN, POWER_LAW, Regularisation, Rheology, NO_REG
from .spatial import FilmState, Grid

ENERGY = "energy"
DISSIPATION = "dissipation"
MASS = "mass"
LP_NORM_THIRD_DERIVATIVE = "lp_norm_third_derivative"

_FUNCTIONALS = (ENERGY, DISSIPATION, MASS, LP_NORM_THIRD_DERIVATIVE)


# ---------------------------------------------------------------------------
# closed-form profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """A registered analytic film profile on an interval.

    ``kind`` is one of ``constant``, ``affine``, ``cosine``, ``cubic``.
    Cosine profiles are ``mean + amp*cos(k*pi*(x-x_left)/L)`` and satisfy the
    wall conditions ``u_x = u_xxx = 0``; affine and cubic profiles do not and
    exist for stencil-exactness checks.
    """

    kind: str
    x_left: float
    x_right: float
    params: tuple

    @classmethod
    def constant(cls, c, x_left=0.0, x_right=1.0):
        return cls("constant", x_left, x_right, (float(c),))

    @classmethod
    def affine(cls, c0, c1, x_left=0.0, x_right=1.0):
        return cls("affine", x_left, x_right, (float(c0), float(c1)))

    @classmethod
    def cosine(cls, mean, amp, k=1, x_left=0.0, x_right=1.0):
        return cls("cosine", x_left, x_right, (float(mean), float(amp), int(k)))

    @classmethod
    def cubic(cls, c0, c1, c2, c3, x_left=0.0, x_right=1.0):
        return cls("cubic", x_left, x_right,
                   (float(c0), float(c1), float(c2), float(c3)))

    @property
    def length(self):
        return self.x_right - self.x_left

    def boundary_compatible(self) -> bool:
        return self.kind in ("constant", "cosine")

    def u(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "constant":
            return np.full_like(x, self.params[0])
        if self.kind == "affine":
            c0, c1 = self.params
            return c0 + c1 * x
        if self.kind == "cosine":
            mean, amp, k = self.params
            return mean + amp * np.cos(k * np.pi * (x - self.x_left) / self.length)
        c0, c1, c2, c3 = self.params
        return c0 + x * (c1 + x * (c2 + x * c3))

    def ux(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "constant":
            return np.zeros_like(x)
        if self.kind == "affine":
            return np.full_like(x, self.params[1])
        if self.kind == "cosine":
            mean, amp, k = self.params
            q = k * np.pi / self.length
            return -amp * q * np.sin(q * (x - self.x_left))
        c0, c1, c2, c3 = self.params
        return c1 + x * (2.0 * c2 + 3.0 * c3 * x)

    def uxxx(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "cosine":
            mean, amp, k = self.params
            q = k * np.pi / self.length
            return amp * q ** 3 * np.sin(q * (x - self.x_left))
        if self.kind == "cubic":
            return np.full_like(x, 6.0 * self.params[3])
        return np.zeros_like(x)

    def sample(self, grid: Grid) -> FilmState:
        return FilmState(grid, self.u(grid.cell_centers()))


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _composite_gauss(f, a, b, panels):
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    x = (mid[:, None] + half * _GL_NODES[None, :]).ravel()
    vals = f(x).reshape(panels, -1)
    return half * float(np.sum(vals @ _GL_WEIGHTS))


def quadrature_functional(profile: Profile, functional: str, alpha: float = 1.0,
                          reg: Regularisation = NO_REG,
                          rel_tol: float = 1e-10, max_panels: int = 1 << 20) -> float:
    """Continuum value of a functional on a closed-form profile.

    Composite 10-point Gauss quadrature with panel doubling until two
    successive refinements agree to ``rel_tol`` relative.  Raises
    :class:`OracleFailureError` instead of guessing when refinement stalls.
    """
    if functional not in _FUNCTIONALS:
        raise ValueError(f"unknown functional {functional!r}")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    sigma = reg.sigma

    if functional == ENERGY:
        def f(x):
            return 0.5 * profile.ux(x) ** 2
    elif functional == MASS:
        def f(x):
            return profile.u(x)
    elif functional == DISSIPATION:
        def f(x):
            w = profile.uxxx(x)
            return profile.u(x) ** (alpha + 2.0) \
                * (w * w + sigma * sigma) ** (0.5 * (alpha - 1.0)) * (w * w)
    else:
        def f(x):
            return np.abs(profile.uxxx(x)) ** (alpha + 1.0)

    panels = 4
    prev = _composite_gauss(f, profile.x_left, profile.x_right, panels)
    while panels <= max_panels:
        panels *= 2
        cur = _composite_gauss(f, profile.x_left, profile.x_right, panels)
        scale = max(abs(cur), abs(prev), 1e-300)
        if abs(cur - prev) <= rel_tol * scale:
            if functional == LP_NORM_THIRD_DERIVATIVE:
                return float(cur ** (1.0 / (alpha + 1.0)))
            return float(cur)
        prev = cur
    raise OracleFailureError(
        f"quadrature did not converge to {rel_tol} within {max_panels} panels")


# ---------------------------------------------------------------------------
# monotonicity sweep
# ---------------------------------------------------------------------------

def monotonicity_sweep(alpha: float, reg: Regularisation = NO_REG,
                       n_samples: int = 2000, seed: int = 0,
                       magnitude_range=(1e-6, 1e3)):
    """Worst normalised monotonicity product of the regularised nonlinearity.

    Draws pairs with log-uniform magnitudes and both signs on the sweep range
    and returns ``min (psi_s(v) - psi_s(w)) * (v - w) / (v - w)**2``; the
    value must be nonnegative for the scheme's Minty structure to hold (and
    is exactly 1 for ``alpha = 1``).
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    from .model import psi_sigma  # local import keeps module load light

    rng = np.random.default_rng(seed)
    lo, hi = magnitude_range
    mags = np.exp(rng.uniform(np.log(lo), np.log(hi), size=2 * n_samples))
    signs = rng.choice((-1.0, 1.0), size=2 * n_samples)
    vals = mags * signs
    v, w = vals[:n_samples], vals[n_samples:]
    keep = v != w
    v, w = v[keep], w[keep]
    pv = psi_sigma(v, alpha, reg)
    pw = psi_sigma(w, alpha, reg)
    d = v - w
    ratios = (pv - pw) * d / (d * d)
    return float(np.min(ratios))


# ---------------------------------------------------------------------------
# reference integrator (independent implementation)
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _oracle_rhs(u, h, kind, alpha, sigma, a, b, dudt):
    """Scheme re-derived via repeated first differences of the mirror
    extension; boundary faces carry no flux."""
    n = u.shape[0]
    # face gradients of the mirror extension: zero at the walls
    d1 = np.zeros(n + 1)
    for j in range(1, n):
        d1[j] = (u[j] - u[j - 1]) / h
    # cell second differences
    d2 = np.empty(n)
    for i in range(n):
        d2[i] = (d1[i + 1] - d1[i]) / h
    # interior-face third differences and fluxes
    flux = np.zeros(n + 1)
    for j in range(1, n):
        w = (d2[j] - d2[j - 1]) / h
        uf = 0.5 * (u[j - 1] + u[j])
        if kind == 0 or alpha == 1.0:  # Newtonian / alpha = 1 power law
            if kind == 2:
                flux[j] = (a * (1.0 + b)) * (uf * uf * uf * w)
            else:
                flux[j] = uf * uf * uf * w
        elif kind == 1:  # power law
            t = w * w + sigma * sigma
            if t == 0.0:
                flux[j] = 0.0
            else:
                flux[j] = uf ** (alpha + 2.0) * t ** (0.5 * (alpha - 1.0)) * w
        else:  # Ellis
            flux[j] = (a * (1.0 + b * abs(uf * w) ** (alpha - 1.0))) \
                * (uf * uf * uf * w)
    for i in range(n):
        dudt[i] = -(flux[i + 1] - flux[i]) / h
    return flux


@njit(cache=True, nogil=True)
def _oracle_rk4(u, h, kind, alpha, sigma, a, b, dt, n_steps, sample_every,
                sample_t, sample_u, min_allowed):
    """Classical fixed-step RK4; returns (n_samples, breach_step).

    ``breach_step >= 0`` flags the first accepted step whose state lost
    positivity (below ``min_allowed``)."""
    n = u.shape[0]
    k1 = np.empty(n); k2 = np.empty(n); k3 = np.empty(n); k4 = np.empty(n)
    stage = np.empty(n)
    nsmp = 0
    sample_t[nsmp] = 0.0
    sample_u[nsmp, :] = u
    nsmp += 1
    for step in range(n_steps):
        _oracle_rhs(u, h, kind, alpha, sigma, a, b, k1)
        for i in range(n):
            stage[i] = u[i] + 0.5 * dt * k1[i]
        _oracle_rhs(stage, h, kind, alpha, sigma, a, b, k2)
        for i in range(n):
            stage[i] = u[i] + 0.5 * dt * k2[i]
        _oracle_rhs(stage, h, kind, alpha, sigma, a, b, k3)
        for i in range(n):
            stage[i] = u[i] + dt * k3[i]
        _oracle_rhs(stage, h, kind, alpha, sigma, a, b, k4)
        umin = 1e308
        for i in range(n):
            u[i] = u[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if u[i] < umin:
                umin = u[i]
        if not umin > min_allowed:
            return nsmp, step
        if (step + 1) % sample_every == 0 or step == n_steps - 1:
            sample_t[nsmp] = (step + 1) * dt
            sample_u[nsmp, :] = u
            nsmp += 1
    return nsmp, -1


def _prolong_pairwise(state: FilmState) -> FilmState:
    """Split every cell into two with a limited linear reconstruction.

    Pair averages reproduce the coarse values exactly, so mass is preserved
    bit-for-bit up to the grid spacing arithmetic.
    """
    u = state.u
    h = state.grid.h
    slope = np.empty_like(u)
    slope[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    slope[0] = (u[1] - u[0]) / (2.0 * h)
    slope[-1] = (u[-1] - u[-2]) / (2.0 * h)
    fine = np.empty(2 * u.size)
    fine[0::2] = u - slope * h / 4.0
    fine[1::2] = u + slope * h / 4.0
    if np.any(fine <= 0.0):
        raise OracleFailureError("prolonged reference state lost positivity")
    g = state.grid
    return FilmState(Grid(g.x_left, g.x_right, 2 * g.n_cells), fine)


def _restrict_pairwise(grid: Grid, fine_u: np.ndarray) -> np.ndarray:
    return 0.5 * (fine_u[0::2] + fine_u[1::2])


def reference_integrate(state0: FilmState, rheo: Rheology,
                        reg: Regularisation, t_end: float,
                        max_samples: int = 2049):
    """Trajectory oracle: fixed-step RK4 on a doubled grid, restricted back.

    The step is one sixteenth of the explicit stability heuristic evaluated
    once on the doubled initial state.  Intended for small problems only;
    guarded at 128 cells.
    """
    from .timestep import stable_dt_estimate  # heuristic, not discretisation
    from .trajectory import Trajectory, Termination, REACHED_T_END, \
        POSITIVITY_BREACH
    from . import functionals as fn

    if state0.n_cells > 128:
        raise ValueError("reference integrator is guarded to n_cells <= 128")
    if t_end <= 0:
        raise ValueError("t_end must be positive")

    fine0 = _prolong_pairwise(state0)
    dt = stable_dt_estimate(fine0, rheo, reg) / 16.0
    n_steps = max(1, int(math.ceil(t_end / dt)))
    dt = t_end / n_steps
    sample_every = max(1, int(math.ceil(n_steps / (max_samples - 1))))
    cap = n_steps // sample_every + 3

    kind = {NEWTONIAN: 0, POWER_LAW: 1, ELLIS: 2}[rheo.kind]
    u = fine0.u.copy()
    sample_t = np.empty(cap)
    sample_u = np.empty((cap, u.size))
    nsmp, breach = _oracle_rk4(
        u, fine0.grid.h, kind, rheo.alpha, reg.sigma, rheo.a, rheo.b,
        dt, n_steps, sample_every, sample_t, sample_u, 0.0)

    # diagnostics on the restricted states, with independent formulas
    grid = state0.grid
    h = grid.h
    rows = np.empty((nsmp, 7))
    for i in range(nsmp):
        uc = _restrict_pairwise(grid, sample_u[i])
        st = FilmState(grid, uc)
        rows[i] = (sample_t[i], fn.energy(st),
                   fn.dissipation(st, rheo, reg), fn.mass(st),
                   float(uc.min()), float(uc.max()),
                   fn.h1_distance_to_mean(st))
    if breach >= 0:
        term = Termination(POSITIVITY_BREACH, float((breach + 1) * dt))
        final = None
    else:
        term = Termination(REACHED_T_END, t_end)
        final = FilmState(grid, _restrict_pairwise(grid, u))
    return Trajectory.from_rows(rows, term, final_state=final,
                                rel_tol=0.0, steady_energy_threshold=0.0)
