"""Trajectory container shared by the adaptive and reference integrators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functionals import Diagnostics
from .spatial import FilmState

REACHED_T_END = "reached_t_end"
STEADY_STATE = "steady_state"
EXTINCTION = "extinction"
POSITIVITY_BREACH = "positivity_breach"
STEP_UNDERFLOW = "step_underflow"

TERMINATION_KINDS = (REACHED_T_END, STEADY_STATE, EXTINCTION,
                     POSITIVITY_BREACH, STEP_UNDERFLOW)

_COLUMNS = ("t", "energy", "dissipation", "mass", "min_height",
            "max_height", "h1_dist")


@dataclass(frozen=True)
class Termination:
    kind: str
    time: float

    def __post_init__(self):
        if self.kind not in TERMINATION_KINDS:
            raise ValueError(f"unknown termination kind {self.kind!r}")


@dataclass
class Trajectory:
    """Time series of diagnostics plus optional state snapshots.

    Sample times are strictly increasing; mass is constant and energy
    nonincreasing along samples up to integrator round-off/tolerance slack.
    """

    t: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    mass: np.ndarray
    min_height: np.ndarray
    max_height: np.ndarray
    h1_dist: np.ndarray
    termination: Termination
    snapshots: list = field(default_factory=list)
    final_state: FilmState | None = None
    rel_tol: float = 0.0
    steady_energy_threshold: float = 0.0
    n_steps: int = 0
    n_rejected: int = 0

    @classmethod
    def from_rows(cls, rows: np.ndarray, termination: Termination, **kw):
        rows = np.asarray(rows, dtype=np.float64)
        cols = {name: rows[:, i].copy() for i, name in enumerate(_COLUMNS)}
        return cls(termination=termination, **cols, **kw)

    def __post_init__(self):
        n = self.t.size
        for name in _COLUMNS:
            if getattr(self, name).size != n:
                raise ValueError("diagnostic columns must share one length")
        if n > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self):
        return self.t.size

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def samples(self):
        return [Diagnostics(*(float(getattr(self, c)[i]) for c in _COLUMNS))
                for i in range(len(self))]

    def rows(self) -> np.ndarray:
        return np.column_stack([getattr(self, c) for c in _COLUMNS])

    def extinction_time(self) -> float | None:
        return self.termination.time if self.termination.kind == EXTINCTION \
            else None
