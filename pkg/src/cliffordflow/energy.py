"""Reduced Laplace-Beltrami operator and the Allen-Cahn energy on reduced grids.

Discrete energy, with M the node masses and K the stiffness of the grid::

    E(u) = |orbit| * ( eps/2 u.K.u + 1/eps sum_i M_i W(u_i) )

and the discrete Laplacian is -M^{-1} K, self-adjoint in the M-inner product.
"""

from __future__ import annotations

import numpy as np

from .grids import Field
from .potential import DEFAULT_POTENTIAL, PotentialSpec


def _check(field: Field) -> np.ndarray:
    u = field.values
    if u.shape != field.grid.shape:
        raise ValueError(f"field values {u.shape} do not match grid {field.grid.shape}")
    return u


def laplace_reduced(field: Field) -> Field:
    """Discrete reduced Laplacian, (1/w)(w u_s)_s [+ u_thth / cos^2 s]."""
    u = _check(field)
    g = field.grid
    return field.with_values(-(g.stiffness @ u) / g.mass)


def inner(field_a: Field, field_b) -> float:
    """Weighted L2 inner product, orbit factor included."""
    g = field_a.grid
    b = field_b.values if isinstance(field_b, Field) else np.asarray(field_b)
    return float(g.orbit_factor * np.dot(g.mass * field_a.values, b))


def dirichlet_energy(field: Field) -> float:
    """sum of weighted |grad u|^2 (without orbit factor)."""
    u = _check(field)
    i, j, c = field.grid.edges
    d = u[i] - u[j]
    return float(np.dot(c, d * d))


def energy(field: Field, pot: PotentialSpec = DEFAULT_POTENTIAL) -> float:
    """Allen-Cahn energy E_eps(u) including the suppressed orbit area."""
    u = _check(field)
    g, eps = field.grid, field.eps
    bulk = np.dot(g.mass, pot.W(u)) / eps
    return float(g.orbit_factor * (0.5 * eps * dirichlet_energy(field) + bulk))


def energy_gradient(field: Field, pot: PotentialSpec = DEFAULT_POTENTIAL) -> Field:
    """Weighted-L2 gradient g = -eps Lap u + W'(u)/eps, so that dE[h] = <g, h>."""
    u = _check(field)
    g, eps = field.grid, field.eps
    return field.with_values(eps * (g.stiffness @ u) / g.mass + pot.dW(u) / eps)


def gradient_norm(field: Field, pot: PotentialSpec = DEFAULT_POTENTIAL) -> float:
    gr = energy_gradient(field, pot)
    return float(np.sqrt(inner(gr, gr)))


def ac_residual(field: Field, pot: PotentialSpec = DEFAULT_POTENTIAL) -> np.ndarray:
    """Nodal residual eps^2 Lap u - W'(u) of the elliptic equation."""
    u = _check(field)
    g = field.grid
    return -field.eps**2 * (g.stiffness @ u) / g.mass - pot.dW(u)


def residual_norm(field: Field, pot: PotentialSpec = DEFAULT_POTENTIAL) -> float:
    """Weighted L2 norm of ``ac_residual`` normalised by the volume of S^{n+1}."""
    r = ac_residual(field, pot)
    g = field.grid
    return float(np.sqrt(np.dot(g.mass, r * r) / g.volume))


def weight_measure_mass(field: Field, pot: PotentialSpec = DEFAULT_POTENTIAL) -> tuple[float, float]:
    """Total mass of the varifold weight measure and the area it represents.

    The density is half the energy density restricted to {grad u != 0}; on the
    grid a node belongs to that set when any incident edge carries a jump.
    Returns (mass, mass / sigma).
    """
    u = _check(field)
    g, eps = field.grid, field.eps
    i, j, c = g.edges
    d = u[i] - u[j]
    active = np.zeros(u.shape, dtype=bool)
    jump = d != 0
    active[i[jump]] = True
    active[j[jump]] = True
    grad_part = 0.5 * eps * np.dot(c, d * d)
    bulk = np.dot(g.mass[active], pot.W(u[active])) / eps
    mass = 0.5 * g.orbit_factor * (grad_part + bulk)
    return float(mass), float(mass / pot.sigma)
