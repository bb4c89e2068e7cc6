"""Double-well potentials and the one-dimensional heteroclinic profile."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

Array = np.ndarray


def _w(t):
    return 0.25 * (1.0 - t * t) ** 2


def _dw(t):
    return t * t * t - t


def _d2w(t):
    return 3.0 * t * t - 1.0


def _secant(a, b):
    # (W(b) - W(a)) / (b - a), exact polynomial division for the quartic
    return 0.25 * (a + b) * (a * a + b * b - 2.0)


def _dsecant_db(a, b):
    return 0.25 * (3.0 * b * b + 2.0 * a * b + a * a - 2.0)


@dataclass(frozen=True)
class PotentialSpec:
    """A smooth double well with wells at +-1.

    ``profile`` is the unit-width heteroclinic: H_eps(t) = profile(t / (width * eps)).
    ``secant(a, b)`` is the divided difference (W(b) - W(a)) / (b - a), which the
    energy-exact time stepper needs; ``dsecant_db`` its derivative in b.
    """

    W: Callable[[Array], Array]
    dW: Callable[[Array], Array]
    d2W: Callable[[Array], Array]
    sigma: float
    width: float
    profile: Callable[[Array], Array]
    secant: Callable[[Array, Array], Array]
    dsecant_db: Callable[[Array, Array], Array]
    name: str = "quartic"

    def max_abs_d2w(self) -> float:
        """max |W''| over [-1, 1], sampled."""
        t = np.linspace(-1.0, 1.0, 2001)
        return float(np.max(np.abs(self.d2W(t))))


DEFAULT_POTENTIAL = PotentialSpec(
    W=_w,
    dW=_dw,
    d2W=_d2w,
    sigma=math.sqrt(2.0) / 3.0,
    width=math.sqrt(2.0),
    profile=np.tanh,
    secant=_secant,
    dsecant_db=_dsecant_db,
)


def sigma_by_quadrature(pot: PotentialSpec) -> float:
    """sigma = int_{-1}^{1} sqrt(W(t)/2) dt, computed numerically."""
    val, _ = quad(lambda t: math.sqrt(max(float(pot.W(t)), 0.0) / 2.0), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return val


def heteroclinic_profile(pot: PotentialSpec, eps: float, t):
    """Heteroclinic H_eps(t), the bounded solution of eps^2 H'' = W'(H) with H(0) = 0."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return pot.profile(np.asarray(t, dtype=float) / (pot.width * eps))
