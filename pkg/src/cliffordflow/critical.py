"""Stationary Allen-Cahn states on one-dimensional reduced grids.

* Clifford state: SO(2) x SO(n)-invariant solution on the latitude_s grid whose
  nodal set is the latitude tan^2 s = n - 1 (the hypersurface T_{1,n-1}).
* Ground state: solution depending on x1 only, nodal set the equator x1 = 0.

Both are saddle points, so they are found with damped Newton from a heteroclinic
initial guess rather than by descent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .energy import ac_residual, energy, residual_norm
from .grids import Field, ReducedGrid, clifford_latitude, min_intervals
from .potential import DEFAULT_POTENTIAL, PotentialSpec, heteroclinic_profile

log = logging.getLogger(__name__)

DEFAULT_N_S = 512
RESOLUTION_RATIO = 8.0


class NonconvergenceError(RuntimeError):
    def __init__(self, msg, last: Field | None = None):
        super().__init__(msg)
        self.last = last


class DegenerateStateError(RuntimeError):
    def __init__(self, msg, state: Field | None = None):
        super().__init__(msg)
        self.state = state


@dataclass
class CriticalState:
    field: Field
    residual: float
    energy: float
    nodal_points: list[float]
    iterations: int = 0
    kind: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def eps(self) -> float:
        return self.field.eps

    @property
    def n(self) -> int:
        return self.field.grid.n

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "epsilon": self.eps,
            "energy": self.energy,
            "residual": self.residual,
            "nodal_points": list(self.nodal_points),
            "iterations": self.iterations,
            **self.field.grid.describe(),
        }


def nodal_points(x: np.ndarray, u: np.ndarray) -> list[float]:
    """Zero crossings by linear interpolation between sign-changing neighbours."""
    pts = []
    for i in range(len(u) - 1):
        a, b = u[i], u[i + 1]
        if a == 0.0:
            pts.append(float(x[i]))
        elif a * b < 0:
            pts.append(float(x[i] + (x[i + 1] - x[i]) * a / (a - b)))
    if u[-1] == 0.0:
        pts.append(float(x[-1]))
    return pts


def check_resolution(grid: ReducedGrid, eps: float):
    if not grid.resolution_ok(eps, RESOLUTION_RATIO):
        raise ValueError(
            f"eps/h = {eps / grid.h:.2f} < {RESOLUTION_RATIO:g}; use N_s >= {min_intervals(grid.kind, eps)}")


def newton_solve(field: Field, pot: PotentialSpec = DEFAULT_POTENTIAL, tol: float = 1e-10,
                 max_iter: int = 60, max_halvings: int = 20) -> tuple[Field, int]:
    """Damped Newton for eps^2 Lap u = W'(u) on a 1-D grid.

    The Jacobian times -M is the symmetric tridiagonal eps^2 K + M W''(u).
    """
    g, eps = field.grid, field.eps
    if g.kind == "disk":
        raise ValueError("newton_solve works on 1-D grids")
    K = g.stiffness
    kd, ko = K.diagonal(0), K.diagonal(1)
    M = g.mass
    u = field.values.copy()
    res = residual_norm(field, pot)
    for it in range(1, max_iter + 1):
        if res < tol:
            return field.with_values(u), it - 1
        r = ac_residual(field.with_values(u), pot)
        ab = np.zeros((3, len(u)))
        ab[0, 1:] = eps**2 * ko
        ab[1] = eps**2 * kd + M * pot.d2W(u)
        ab[2, :-1] = eps**2 * ko
        try:
            du = solve_banded((1, 1), ab, M * r)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NonconvergenceError(f"singular Newton system at iteration {it}: {exc}",
                                      field.with_values(u)) from exc
        step = 1.0
        for _ in range(max_halvings + 1):
            trial = u + step * du
            new = residual_norm(field.with_values(trial), pot)
            if np.isfinite(new) and new < res:
                break
            step *= 0.5
        else:
            raise NonconvergenceError(f"line search failed at iteration {it} (residual {res:.3e})",
                                      field.with_values(u))
        u, res = trial, new
        log.debug("newton it=%d residual=%.3e step=%g", it, res, step)
    if res < tol:
        return field.with_values(u), max_iter
    raise NonconvergenceError(f"Newton did not reach {tol:g} in {max_iter} iterations (residual {res:.3e})",
                              field.with_values(u))


def _finish(field: Field, its: int, kind: str, pot: PotentialSpec) -> CriticalState:
    u = field.values
    for c in (-1.0, 0.0, 1.0):
        if np.max(np.abs(u - c)) < 0.05:
            raise DegenerateStateError(f"converged to the constant {c:g}", field)
    return CriticalState(
        field=field,
        residual=residual_norm(field, pot),
        energy=energy(field, pot),
        nodal_points=nodal_points(field.grid.nodes, u),
        iterations=its,
        kind=kind,
    )


def clifford_grid(n: int, eps: float, N_s: int | None = None) -> ReducedGrid:
    N = N_s or max(DEFAULT_N_S, min_intervals("latitude_s", eps, RESOLUTION_RATIO))
    return ReducedGrid(n, "latitude_s", N)


def ground_grid(n: int, eps: float, N_s: int | None = None) -> ReducedGrid:
    # alpha spans twice the length of s, so twice the intervals for the same h
    N = N_s or max(2 * DEFAULT_N_S, min_intervals("latitude_alpha", eps, RESOLUTION_RATIO))
    return ReducedGrid(n, "latitude_alpha", N)


def clifford_initial(grid: ReducedGrid, eps: float, pot: PotentialSpec = DEFAULT_POTENTIAL) -> Field:
    s = grid.nodes
    return Field(grid, heteroclinic_profile(pot, eps, s - clifford_latitude(grid.n)), eps)


def solve_clifford_state(n: int, eps: float, grid: ReducedGrid | None = None, init: Field | None = None,
                         pot: PotentialSpec = DEFAULT_POTENTIAL, tol: float = 1e-10) -> CriticalState:
    """Allen-Cahn approximation of T_{1,n-1} on the latitude_s grid."""
    grid = grid or clifford_grid(n, eps)
    if grid.kind != "latitude_s" or grid.n != n:
        raise ValueError("solve_clifford_state needs a latitude_s grid of matching n")
    check_resolution(grid, eps)
    start = clifford_initial(grid, eps, pot) if init is None else Field(grid, init.values, eps)
    sol, its = newton_solve(start, pot, tol)
    return _finish(sol, its, "clifford", pot)


def solve_ground_state(n: int, eps: float, grid: ReducedGrid | None = None, init: Field | None = None,
                       pot: PotentialSpec = DEFAULT_POTENTIAL, tol: float = 1e-10) -> CriticalState:
    """Ground state with nodal set the equator {x1 = 0}, on the latitude_alpha grid."""
    grid = grid or ground_grid(n, eps)
    if grid.kind != "latitude_alpha" or grid.n != n:
        raise ValueError("solve_ground_state needs a latitude_alpha grid of matching n")
    check_resolution(grid, eps)
    if init is None:
        start = Field(grid, heteroclinic_profile(pot, eps, grid.nodes), eps)
    else:
        start = Field(grid, init.values, eps)
    sol, its = newton_solve(start, pot, tol)
    return _finish(sol, its, "ground", pot)


def continuation_sweep(n: int, eps_list, which: str = "clifford", N_s: int | None = None,
                       pot: PotentialSpec = DEFAULT_POTENTIAL, tol: float = 1e-10) -> list[CriticalState]:
    """Warm-started solves along a decreasing list of eps on one shared grid."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        return []
    for a, b in zip(eps_list, eps_list[1:]):
        if not b < a:
            raise ValueError("eps_list must be strictly decreasing")
        if a / b > 2.0 + 1e-12:
            raise ValueError("consecutive eps may differ by at most a factor 2")
    if which not in ("clifford", "ground"):
        raise ValueError(f"which must be 'clifford' or 'ground', got {which!r}")
    eps_min = eps_list[-1]
    make_grid = clifford_grid if which == "clifford" else ground_grid
    solver = solve_clifford_state if which == "clifford" else solve_ground_state
    grid = make_grid(n, eps_min, N_s)
    states: list[CriticalState] = []
    prev = None
    for eps in eps_list:
        try:
            st = solver(n, eps, grid=grid, init=prev, pot=pot, tol=tol)
        except (NonconvergenceError, DegenerateStateError) as exc:
            raise type(exc)(f"eps={eps:g}: {exc}", getattr(exc, "last", None) or getattr(exc, "state", None)) from exc
        states.append(st)
        prev = st.field
    return states


def expected_clifford_energy(n: int, pot: PotentialSpec = DEFAULT_POTENTIAL) -> float:
    from .geometry import clifford_area
    return 2 * pot.sigma * clifford_area((1, n - 1))


def expected_ground_energy(n: int, pot: PotentialSpec = DEFAULT_POTENTIAL) -> float:
    from .geometry import sphere_area
    return 2 * pot.sigma * sphere_area(n)
