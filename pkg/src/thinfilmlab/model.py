"""Constitutive nonlinearities and flux densities for film rheologies.

The conservative flux through a film cross-section is ``m(u) * g(w)`` where
``u > 0`` is the film height, ``w`` stands for the third spatial derivative
of the height, ``m`` is a height-dependent mobility and ``g`` a monotone
(odd, increasing) nonlinearity:

* power-law:  ``m(u) = u**(alpha+2)``, ``g = psi_sigma`` (``psi`` for
  ``sigma = 0``),
* Ellis:      ``m(u) = a*u**3``, ``g(w) = (1 + b*|u*w|**(alpha-1)) * w``,
* Newtonian:  ``m(u) = u**3``, ``g(w) = w`` (the ``alpha = 1`` case of both).

``alpha < 1`` models shear-thickening fluids, ``alpha > 1`` shear-thinning
ones.  All functions below accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, SingularityError

#: Default ceiling for the derivative of the flux nonlinearity used by the
#: step-size heuristic.  For sigma = 0 and alpha < 1 that derivative blows up
#: at w = 0; the heuristic never evaluates it there but caps it instead.
PSI_PRIME_CAP = 1.0e8

NEWTONIAN = "newtonian"
POWER_LAW = "power_law"
ELLIS = "ellis"

_KINDS = (NEWTONIAN, POWER_LAW, ELLIS)


@dataclass(frozen=True)
class Rheology:
    """Constitutive law selector.

    ``alpha`` is the flow-behaviour exponent; ``a`` and ``b`` are the
    positive physical parameters of the Ellis law (ignored otherwise).
    """

    kind: str
    alpha: float = 1.0
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown rheology kind {self.kind!r}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be a positive real, got {self.alpha}")
        if self.kind == ELLIS:
            if self.alpha < 1:
                raise ValueError("Ellis law requires alpha >= 1 "
                                 "(alpha = 1 is the Newtonian plateau)")
            if self.a <= 0 or self.b <= 0:
                raise ValueError("Ellis parameters a, b must be positive")

    @classmethod
    def newtonian(cls) -> "Rheology":
        return cls(NEWTONIAN)

    @classmethod
    def power_law(cls, alpha: float) -> "Rheology":
        return cls(POWER_LAW, alpha=alpha)

    @classmethod
    def ellis(cls, alpha: float, a: float = 1.0, b: float = 1.0) -> "Rheology":
        return cls(ELLIS, alpha=alpha, a=a, b=b)


@dataclass(frozen=True)
class Regularisation:
    """Smoothing parameter for the degenerate nonlinearity.

    ``sigma = 0`` selects the unregularised law.
    """

    sigma: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.sigma < 1.0) or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must lie in [0, 1), got {self.sigma}")


#: Shorthand for the unregularised law.
NO_REG = Regularisation(0.0)


def _prepare(s):
    """Coerce input to float64, rejecting non-finite values."""
    arr = np.asarray(s, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite argument")
    return arr


def _maybe_scalar(arr, template):
    if np.isscalar(template) or np.ndim(template) == 0:
        return float(arr)
    return arr


def psi(s, alpha: float):
    """Odd monotone power nonlinearity ``|s|**(alpha-1) * s``.

    Continuously extended by 0 at the origin for every ``alpha > 0``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    arr = _prepare(s)
    if alpha == 1.0:
        return _maybe_scalar(arr.copy(), s)
    out = np.zeros_like(arr)
    nz = arr != 0.0
    out[nz] = np.abs(arr[nz]) ** (alpha - 1.0) * arr[nz]
    return _maybe_scalar(out, s)


def psi_sigma(s, alpha: float, reg: Regularisation):
    """Regularised nonlinearity ``(s**2 + sigma**2)**((alpha-1)/2) * s``.

    Smooth and strictly increasing for ``sigma > 0``; coincides with
    :func:`psi` for ``sigma = 0``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    sigma = reg.sigma
    if sigma == 0.0:
        return psi(s, alpha)
    arr = _prepare(s)
    if alpha == 1.0:
        return _maybe_scalar(arr.copy(), s)
    out = (arr * arr + sigma * sigma) ** (0.5 * (alpha - 1.0)) * arr
    return _maybe_scalar(out, s)


def psi_sigma_prime(s, alpha: float, reg: Regularisation):
    """Derivative of :func:`psi_sigma` with respect to ``s``.

    Equals ``alpha*(s**2+sigma**2)**((alpha-1)/2)
    - sigma**2*(alpha-1)*(s**2+sigma**2)**((alpha-3)/2)`` and is strictly
    positive for ``sigma > 0``.  For ``sigma = 0`` it reduces to
    ``alpha*|s|**(alpha-1)``, which is singular at ``s = 0`` when
    ``alpha < 1``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    sigma = reg.sigma
    arr = _prepare(s)
    if alpha == 1.0:
        return _maybe_scalar(np.ones_like(arr), s)
    if sigma == 0.0:
        if alpha < 1.0 and np.any(arr == 0.0):
            raise SingularityError(
                "psi' is singular at s = 0 for sigma = 0 and alpha < 1")
        out = np.zeros_like(arr)
        nz = arr != 0.0
        out[nz] = alpha * np.abs(arr[nz]) ** (alpha - 1.0)
        return _maybe_scalar(out, s)
    t = arr * arr + sigma * sigma
    out = alpha * t ** (0.5 * (alpha - 1.0)) \
        - sigma * sigma * (alpha - 1.0) * t ** (0.5 * (alpha - 3.0))
    return _maybe_scalar(out, s)


def flux_density(u, w, rheo: Rheology, reg: Regularisation = NO_REG):
    """Pointwise flux density ``m(u) * g(w)`` for the selected rheology.

    ``u`` must be positive.  The regularisation only affects the power-law
    branch; the Ellis nonlinearity is already continuous in ``w`` for
    ``alpha > 1``.  The output carries the sign of ``w``.
    """
    ua = _prepare(u)
    wa = _prepare(w)
    if np.any(ua <= 0.0):
        raise DegeneracyError("flux density requires positive film height")
    if rheo.kind == NEWTONIAN:
        out = ua ** 3.0 * wa
    elif rheo.kind == POWER_LAW:
        out = ua ** (rheo.alpha + 2.0) * psi_sigma(wa, rheo.alpha, reg)
    else:  # Ellis; grouping keeps the alpha = 1 scaling coincidence exact
        t = np.abs(ua * wa) ** (rheo.alpha - 1.0)
        out = (rheo.a * (1.0 + rheo.b * t)) * (ua ** 3.0 * wa)
    return _maybe_scalar(np.asarray(out), u if np.ndim(u) else w)


def flux_linearisation(u, w, rheo: Rheology, reg: Regularisation = NO_REG,
                       cap: float = PSI_PRIME_CAP):
    """Mobility times the (capped) derivative of the flux nonlinearity.

    This is the local diffusion coefficient of the linearised equation and
    drives the explicit step-size heuristic.  The derivative factor is
    clamped into ``[1/cap, cap]`` so the result is always finite and
    positive, even where the true derivative is singular (``sigma = 0``,
    ``alpha < 1``, ``w = 0``) or vanishes (``alpha > 1``, ``w = 0``).
    """
    ua = _prepare(u)
    wa = _prepare(w)
    if np.any(ua <= 0.0):
        raise DegeneracyError("flux linearisation requires positive height")
    lo = 1.0 / cap
    if rheo.kind == NEWTONIAN:
        return _maybe_scalar(ua ** 3.0 * np.clip(1.0, lo, cap), u)
    if rheo.kind == POWER_LAW:
        alpha = rheo.alpha
        m = ua ** (alpha + 2.0)
        if alpha == 1.0:
            dpsi = np.ones_like(wa)
        elif reg.sigma > 0.0:
            dpsi = psi_sigma_prime(wa, alpha, reg)
        else:
            dpsi = np.empty_like(np.broadcast_arrays(ua, wa)[1])
            nz = wa != 0.0
            dpsi[nz] = alpha * np.abs(wa[nz]) ** (alpha - 1.0)
            dpsi[~nz] = cap if alpha < 1.0 else lo
        return _maybe_scalar(m * np.clip(dpsi, lo, cap), u)
    # Ellis: d/dw [ (1 + b|uw|**(alpha-1)) w ] = 1 + alpha*b*|uw|**(alpha-1)
    bracket = 1.0 + rheo.alpha * rheo.b * np.abs(ua * wa) ** (rheo.alpha - 1.0)
    return _maybe_scalar(rheo.a * ua ** 3.0 * np.clip(bracket, lo, cap), u)
