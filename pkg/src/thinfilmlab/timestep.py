"""Adaptive explicit time integration with positivity guard and events.

The stepper is an embedded explicit Runge-Kutta 3(2) pair with the first-
same-as-last property.  A step is rejected both on the usual error test and
whenever a provisional height dips to the positivity floor, in which case
the step is halved.  Energy is monitored every accepted step: reaching the
steady-energy threshold terminates the run, as finite-time extinction for
shear-thickening power laws or as plain steady state otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as K
from .errors import ConfigError, NumericalBlowupError
from .model import POWER_LAW, Regularisation, Rheology, NO_REG, \
    flux_linearisation
from .spatial import FilmState, face_height, face_third_difference
from .trajectory import (EXTINCTION, POSITIVITY_BREACH, REACHED_T_END,
                         STEADY_STATE, STEP_UNDERFLOW, Termination, Trajectory)

_TERM_BY_CODE = {
    K.TERM_REACHED: REACHED_T_END,
    K.TERM_STEADY: STEADY_STATE,
    K.TERM_EXTINCT: EXTINCTION,
    K.TERM_POSBREACH: POSITIVITY_BREACH,
    K.TERM_UNDERFLOW: STEP_UNDERFLOW,
}

SAMPLE_BUFFER_CAPACITY = 16384


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control and event parameters for :func:`integrate`.

    ``dt_init = None`` asks for the stability heuristic;
    ``steady_energy_threshold = None`` defaults to ``1e-14`` times the
    initial energy.  ``positivity_floor`` is a fraction of the initial
    minimum height.
    """

    t_end: float
    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    dt_init: float | None = None
    dt_min: float | None = None
    positivity_floor: float = 1e-3
    steady_energy_threshold: float | None = None
    sample_stride: int = 16
    max_steps: int = 400_000_000

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigError("t_end must be a positive real")
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        if not (0.0 < self.positivity_floor < 1.0):
            raise ConfigError("positivity_floor must lie in (0, 1)")
        if self.steady_energy_threshold is not None \
                and self.steady_energy_threshold < 0:
            raise ConfigError("steady_energy_threshold must be nonnegative")
        if self.sample_stride < 1:
            raise ConfigError("sample_stride must be a positive integer")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be positive")
        dt_min = self.effective_dt_min()
        if self.dt_init is not None:
            if not (dt_min < self.dt_init <= self.t_end):
                raise ConfigError(
                    "dt_init must satisfy dt_min < dt_init <= t_end")

    def effective_dt_min(self) -> float:
        if self.dt_min is not None:
            if self.dt_min <= 0:
                raise ConfigError("dt_min must be positive")
            return self.dt_min
        return 1e-13 * self.t_end


def stable_dt_estimate(state: FilmState, rheo: Rheology,
                       reg: Regularisation = NO_REG,
                       c_stab: float = 0.5,
                       psi_prime_cap: float = 1e8) -> float:
    """Heuristic explicit step bound ``c_stab * h**4 / max(m * psi')``.

    The nonlinearity derivative is capped (default ``1e8``), so the estimate
    stays finite and positive even where the true derivative is singular.
    The maximum runs over interior faces.
    """
    h = state.grid.h
    w = face_third_difference(state)
    fh = face_height(state)
    lin = flux_linearisation(fh[1:-1], w[1:-1], rheo, reg, cap=psi_prime_cap)
    return c_stab * h ** 4 / float(np.max(lin))


def integrate(state0: FilmState, rheo: Rheology, reg: Regularisation,
              cfg: IntegratorConfig, snapshot_times=None) -> Trajectory:
    """Advance a positive state to ``cfg.t_end``, recording diagnostics.

    Terminates at the end time, at the steady-energy threshold (declared as
    extinction in the shear-thickening power-law regime), or on positivity
    breach / step underflow when the controller cannot continue.  Raises
    :class:`NumericalBlowupError` if a non-finite state slips through.
    """
    if not isinstance(cfg, IntegratorConfig):
        raise ConfigError("cfg must be an IntegratorConfig")
    n = state0.n_cells
    if n < 4:
        raise ConfigError("integration needs at least 4 cells")

    from .functionals import energy as energy_fn
    e0 = energy_fn(state0)
    threshold = cfg.steady_energy_threshold
    if threshold is None:
        threshold = 1e-14 * e0

    dt_min = cfg.effective_dt_min()
    dt0 = cfg.dt_init
    if dt0 is None:
        dt0 = stable_dt_estimate(state0, rheo, reg)
        dt0 = min(max(dt0, 2.0 * dt_min), cfg.t_end)

    pos_floor = cfg.positivity_floor * float(np.min(state0.u))
    extinct_flag = rheo.kind == POWER_LAW and rheo.alpha < 1.0

    if snapshot_times is None:
        snap_times = np.empty(0)
    else:
        snap_times = np.sort(np.asarray(snapshot_times, dtype=np.float64))
    snap_u = np.empty((snap_times.size, n))
    snap_t = np.empty(snap_times.size)

    samples = np.empty((SAMPLE_BUFFER_CAPACITY, 7))
    u_final = np.empty(n)
    fcode = K.flux_code(rheo.kind, rheo.alpha, reg.sigma)

    (nsmp, code, t_term, nacc, nrej_e, nrej_p, n_snaps, t_good,
     _stride) = K._integrate_adaptive(
        state0.u, state0.grid.h, fcode, rheo.alpha, reg.sigma, rheo.a,
        rheo.b, cfg.t_end, cfg.rel_tol, cfg.abs_tol, dt0, dt_min,
        pos_floor, threshold, extinct_flag, cfg.sample_stride, samples,
        snap_times, snap_u, snap_t, cfg.max_steps, u_final)

    if code == K.TERM_BLOWUP:
        raise NumericalBlowupError(
            f"non-finite state at t = {t_term}", last_good_time=t_good)
    if code == K.TERM_STEPLIMIT:
        raise NumericalBlowupError(
            f"step budget {cfg.max_steps} exhausted at t = {t_term}",
            last_good_time=t_good)

    snapshots = [(float(snap_t[i]), FilmState(state0.grid, snap_u[i].copy()))
                 for i in range(n_snaps)]
    final_state = FilmState(state0.grid, u_final)
    return Trajectory.from_rows(
        samples[:nsmp], Termination(_TERM_BY_CODE[code], float(t_term)),
        snapshots=snapshots, final_state=final_state, rel_tol=cfg.rel_tol,
        steady_energy_threshold=float(threshold), n_steps=int(nacc),
        n_rejected=int(nrej_e + nrej_p))
