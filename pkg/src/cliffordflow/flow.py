"""Parabolic Allen-Cahn flow eps u_t = eps Lap u - W'(u)/eps on reduced grids,
the unstable-direction shooting from the Clifford state, and flow diagnostics.

Time stepping
-------------
The default scheme ("dg") is the discrete-gradient (average vector field) step

    eps M (b - a)/dt = -eps K (a + b)/2 - (1/eps) M Q(a, b),    Q(a, b) = (W(b) - W(a))/(b - a),

for which E(b) - E(a) = -eps |b - a|_M^2 / dt holds exactly, so the discrete
dissipation identity is limited only by the nonlinear solve.  The nonlinear
system is solved by a fixed-point iteration on the constant SPD operator

    A = (eps/dt + S/eps) M + (eps/2) K,

which contracts with factor max|Q_b - S| / (eps^2/dt + S) (about 0.14 at
dt = 0.2 eps^2, S = 1/4).  ``scheme="imex"`` gives the linearly implicit
Euler step (implicit K, explicit W').

On the disk grid A commutes with theta-rotations, so it is block-diagonalised by
a real FFT in theta: each Fourier mode is a symmetric positive definite
tridiagonal system in s.  Only mode 0 couples to the centre unknown.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.fft import irfft, rfft
from scipy.linalg import lapack

from .critical import CriticalState, solve_clifford_state
from .energy import energy, gradient_norm, weight_measure_mass
from .geometry import clifford_area, sphere_area
from .grids import Field, ReducedGrid, embed_in_disk, min_intervals
from .potential import DEFAULT_POTENTIAL, PotentialSpec
from .spectrum import mode_problem
from ._kernels import change_and_scale, disk_stiffness_apply, ldl_solve_columns, quartic_rhs

log = logging.getLogger(__name__)

STAB_SHIFT = 0.25
# absolute floor for the fixed-point stop, in units of u (a few ulp of |u| <= 1)
STEP_ATOL = 1e-14
DIVERGE_BOUND = 1.5
CONST_TOL = 0.05
GRAD_TOL = 1e-8
MONOTONE_RTOL = 1e-10
DISSIPATION_RTOL = 1e-3
PLATEAU_BAND = 0.05


class InstabilityError(RuntimeError):
    pass


class NormalizationError(ValueError):
    pass


class ShootingPreconditionError(RuntimeError):
    pass


class DichotomyError(RuntimeError):
    def __init__(self, msg, probes=None):
        super().__init__(msg)
        self.probes = probes or []


class Termination(str, enum.Enum):
    REACHED_T_END = "ReachedTEnd"
    PLUS_ONE = "ConvergedPlusOne"
    MINUS_ONE = "ConvergedMinusOne"
    NONCONSTANT = "ConvergedNonconstant"
    DIVERGED = "Diverged"


def dt_max(eps: float, pot: PotentialSpec = DEFAULT_POTENTIAL) -> float:
    return 0.4 * eps**2 / pot.max_abs_d2w()


# -- linear solver ------------------------------------------------------------


class _TridiagSolver:
    """Solves (alpha M + beta K) x = r for a fixed grid, alpha and beta."""

    def __init__(self, grid: ReducedGrid, alpha: float, beta: float):
        self.grid = grid
        g = grid
        f = g.face_1d
        m = g.mass_1d
        N = g.N_s
        if g.kind != "disk":
            d = alpha * m
            d[:-1] += beta * f
            d[1:] += beta * f
            e = -beta * f
            self._fac = self._factor(d, e)
            return
        T = g.N_theta
        dth = g.dtheta
        K = T // 2 + 1
        lam = 2.0 - 2.0 * np.cos(2.0 * math.pi * np.arange(K) / T)
        c = np.append(g.angular_coupling, 0.0)
        blk = N + 1
        # mode-0 block: dtheta times the 1-D latitude_s operator, centre included
        base = alpha * dth * m
        base[:-1] += beta * dth * f
        base[1:] += beta * dth * f
        d = np.tile(base, (K, 1)) + beta * np.outer(lam, c)
        e = np.tile(np.append(-beta * dth * f, 0.0), (K, 1))
        # modes k >= 1 vanish at the centre: identity row, no coupling
        d[1:, N] = 1.0
        e[1:, N - 1] = 0.0
        D, E = self._factor(d.ravel(), e.ravel()[:-1])
        # (s, mode) layout so the rfft output feeds the column solver directly
        self._D = np.ascontiguousarray(1.0 / D.reshape(K, blk).T)
        self._E = np.ascontiguousarray(np.append(E, 0.0).reshape(K, blk).T[:N])
        self._shape = (K, blk)

    @staticmethod
    def _factor(d, e):
        d2, e2, info = lapack.dpttrf(d, e)
        if info != 0:
            raise np.linalg.LinAlgError(f"tridiagonal factorisation failed (info={info})")
        return d2, e2

    def _pttrs(self, b):
        x, info = lapack.dpttrs(self._fac[0], self._fac[1], b)
        if info != 0:
            raise np.linalg.LinAlgError(f"tridiagonal solve failed (info={info})")
        return x

    def solve(self, r: np.ndarray) -> np.ndarray:
        g = self.grid
        if g.kind != "disk":
            return self._pttrs(r)
        N, T = g.N_s, g.N_theta
        K, _ = self._shape
        B = np.empty((N + 1, K), dtype=complex)
        B[:N] = rfft(r[:-1].reshape(N, T), axis=1)
        B[N] = 0.0
        B[N, 0] = r[-1]
        ldl_solve_columns(self._D, self._E, B)
        out = np.empty(g.size)
        out[:-1] = irfft(B[:N], n=T, axis=1).ravel()
        out[-1] = B[N, 0].real / T
        return out


@lru_cache(maxsize=16)
def _solver(grid: ReducedGrid, alpha: float, beta: float) -> _TridiagSolver:
    return _TridiagSolver(grid, alpha, beta)


# -- stepping -----------------------------------------------------------------


@dataclass
class StepInfo:
    delta: np.ndarray
    iterations: int
    d_energy: float
    dissipation: float
    Kb: np.ndarray | None = None


class PACStepper:
    """One-step map of the parabolic Allen-Cahn equation on a fixed grid."""

    def __init__(self, grid: ReducedGrid, eps: float, dt: float, scheme: str = "dg",
                 pot: PotentialSpec = DEFAULT_POTENTIAL, rtol: float = 1e-6, max_iter: int = 60):
        if scheme not in ("dg", "imex"):
            raise ValueError(f"unknown scheme {scheme!r}")
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.grid, self.eps, self.dt, self.scheme, self.pot = grid, eps, dt, scheme, pot
        self.rtol, self.max_iter = rtol, max_iter
        self.M = grid.mass
        self.K = grid.stiffness
        self.orbit = grid.orbit_factor
        if grid.kind == "disk":
            self._f = np.ascontiguousarray(grid.face_1d)
            self._c = np.ascontiguousarray(grid.angular_coupling)
        if scheme == "dg":
            self.shift = STAB_SHIFT
            self.solver = _solver(grid, eps / dt + STAB_SHIFT / eps, 0.5 * eps)
        else:
            self.shift = 0.0
            self.solver = _solver(grid, eps / dt, eps)

    def apply_K(self, u: np.ndarray) -> np.ndarray:
        if self.grid.kind != "disk":
            return self.K @ u
        out = np.empty_like(u)
        disk_stiffness_apply(u, self._f, self._c, self.grid.dtheta, out)
        return out

    def energy_change(self, a: np.ndarray, b: np.ndarray, Ka: np.ndarray | None = None,
                      Kb: np.ndarray | None = None) -> float:
        """E(b) - E(a) without cancellation: b.Kb - a.Ka = (b - a).K(a + b) and
        W(b) - W(a) = (b - a) Q(a, b)."""
        Ka = self.apply_K(a) if Ka is None else Ka
        Kb = self.apply_K(b) if Kb is None else Kb
        d = b - a
        grad = 0.5 * self.eps * np.dot(d, Ka + Kb)
        bulk = np.dot(self.M, d * self.pot.secant(a, b)) / self.eps
        return float(self.orbit * (grad + bulk))

    def step(self, a: np.ndarray, guess: np.ndarray | None = None,
             Ka: np.ndarray | None = None) -> tuple[np.ndarray, StepInfo]:
        """One step from ``a``; ``guess`` predicts the increment, ``Ka`` may pass K @ a."""
        eps, M, pot = self.eps, self.M, self.pot
        Ka = self.apply_K(a) if Ka is None else Ka
        if self.scheme == "imex":
            delta = self.solver.solve(-eps * Ka - M * pot.dW(a) / eps)
            its = 1
        else:
            lin = -eps * Ka
            S = self.shift
            delta = np.zeros_like(a) if guess is None else guess.copy()
            rhs = np.empty_like(a)
            fast = pot is DEFAULT_POTENTIAL
            for its in range(1, self.max_iter + 1):
                if fast:
                    quartic_rhs(lin, M, a, delta, S, 1.0 / eps, rhs)
                else:
                    rhs = lin - M * (pot.secant(a, a + delta) - S * delta) / eps
                new = self.solver.solve(rhs)
                change, scale = change_and_scale(new, delta)
                delta = new
                if not np.isfinite(change) or change <= self.rtol * scale + STEP_ATOL:
                    break
            else:
                raise InstabilityError(f"fixed-point iteration did not converge in {self.max_iter} steps")
        b = a + delta
        Kb = self.apply_K(b)
        diss = float(self.orbit * eps * np.dot(M, delta * delta) / self.dt)
        return b, StepInfo(delta, its, self.energy_change(a, b, Ka, Kb), diss, Kb)


def step_pac(field: Field, dt: float | None = None, scheme: str = "dg",
             pot: PotentialSpec = DEFAULT_POTENTIAL) -> Field:
    """Advance ``field`` by one time step of the parabolic Allen-Cahn equation."""
    dt = dt_max(field.eps, pot) if dt is None else dt
    if not dt > 0:
        raise ValueError("dt must be positive")
    st = PACStepper(field.grid, field.eps, dt, scheme, pot)
    b, _ = st.step(field.values)
    return field.with_values(b)


# -- traces -------------------------------------------------------------------


@dataclass
class FlowTrace:
    n: int
    eps: float
    dt: float
    scheme: str
    times: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    dissipation: list[float] = field(default_factory=list)
    d_energy: list[float] = field(default_factory=list)
    min_u: list[float] = field(default_factory=list)
    max_u: list[float] = field(default_factory=list)
    mass: list[float] = field(default_factory=list)
    area_estimate: list[float] = field(default_factory=list)
    grad_norm: list[float] = field(default_factory=list)
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)
    termination: Termination = Termination.REACHED_T_END
    final: Field | None = None
    steps: int = 0
    iterations: int = 0
    # energy resolution near a well: u is only resolved to STEP_ATOL, W''(+-1)/2 = 1
    energy_atol: float = 0.0

    def __len__(self):
        return len(self.times)

    def energy_monotone(self, rtol: float = MONOTONE_RTOL) -> bool:
        E = np.asarray(self.energy)
        return bool(np.all(E[1:] <= E[:-1] + rtol * np.abs(E[:-1]) + self.energy_atol))

    def dissipation_defects(self) -> np.ndarray:
        """Per-interval |dE + D| / |dE|, with dE the accumulated exact per-step changes."""
        dE = np.asarray(self.d_energy[1:])
        D = np.asarray(self.dissipation[1:])
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.abs(dE + D) / np.abs(dE)
        out[(dE == 0) & (D == 0)] = 0.0
        return out

    def energy_drift(self) -> float:
        """max |(E_{i+1} - E_i) - dE_i| over intervals: round-off between direct
        energy differences and the accumulated per-step changes."""
        if len(self.energy) < 2:
            return 0.0
        direct = np.diff(self.energy)
        return float(np.max(np.abs(direct - np.asarray(self.d_energy[1:]))))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "energy", "dissipation", "min_u", "max_u", "mass", "area_estimate"])
        for row in zip(self.times, self.energy, self.dissipation, self.min_u, self.max_u,
                       self.mass, self.area_estimate):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.eps,
            "dt": self.dt,
            "scheme": self.scheme,
            "samples": len(self.times),
            "steps": self.steps,
            "t_final": self.times[-1] if self.times else 0.0,
            "termination": self.termination.value,
            "energy_initial": self.energy[0] if self.energy else None,
            "energy_final": self.energy[-1] if self.energy else None,
        }


def ground_level(n: int, pot: PotentialSpec = DEFAULT_POTENTIAL) -> float:
    return 2.0 * pot.sigma * sphere_area(n)


def classify_limit(trace: FlowTrace, field: Field, pot: PotentialSpec = DEFAULT_POTENTIAL) -> Termination | None:
    """Terminal classification of the current state, or None if undecided."""
    if len(trace) < 2:
        return None
    u = field.values
    if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > DIVERGE_BOUND:
        return Termination.DIVERGED
    if np.max(np.abs(u - 1.0)) < CONST_TOL:
        return Termination.PLUS_ONE
    if np.max(np.abs(u + 1.0)) < CONST_TOL:
        return Termination.MINUS_ONE
    gn = trace.grad_norm[-1] if trace.grad_norm else gradient_norm(field, pot)
    if gn < GRAD_TOL and trace.energy[-1] > 0.5 * ground_level(field.n, pot):
        return Termination.NONCONSTANT
    return None


def _record(trace: FlowTrace, t: float, fld: Field, dE: float, diss: float, pot: PotentialSpec):
    u = fld.values
    mass, area = weight_measure_mass(fld, pot)
    trace.times.append(t)
    trace.energy.append(energy(fld, pot))
    trace.d_energy.append(dE)
    trace.dissipation.append(diss)
    trace.min_u.append(float(np.min(u)))
    trace.max_u.append(float(np.max(u)))
    trace.mass.append(mass)
    trace.area_estimate.append(area)
    trace.grad_norm.append(gradient_norm(fld, pot))


def geometric_times(t_end: float, count: int = 16, t_first: float = 0.01) -> list[float]:
    if t_end <= t_first:
        return [0.0, t_end]
    return [0.0] + list(np.geomspace(t_first, t_end, count - 1))


def evolve(field: Field, t_end: float, sample_every: float = 0.05, dt: float | None = None,
           scheme: str = "dg", pot: PotentialSpec = DEFAULT_POTENTIAL,
           snapshot_times=None, classify: bool = True, check: bool = True) -> FlowTrace:
    """Integrate to ``t_end`` (or until a terminal classification), sampling
    diagnostics every ``sample_every``.  dt is reduced so that it divides the
    sampling interval.  Snapshots are stored at the first sample at or after
    each requested time, plus the final state."""
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if not sample_every > 0:
        raise ValueError("sample_every must be positive")
    eps = field.eps
    dt = dt_max(eps, pot) if dt is None else dt
    per = max(1, math.ceil(sample_every / dt - 1e-9))
    dt = sample_every / per
    stepper = PACStepper(field.grid, eps, dt, scheme, pot)
    g = field.grid
    trace = FlowTrace(field.n, eps, dt, scheme,
                      energy_atol=g.orbit_factor * float(np.sum(g.mass)) * STEP_ATOL**2 / eps)
    snaps = sorted(geometric_times(t_end) if snapshot_times is None else snapshot_times)
    n_samples = math.ceil(t_end / sample_every - 1e-9)

    u = field.values.copy()
    _record(trace, 0.0, field, 0.0, 0.0, pot)
    snap_i = 0

    def take_snap(t):
        nonlocal snap_i
        while snap_i < len(snaps) and snaps[snap_i] <= t + 1e-12:
            trace.snapshots[round(t, 12)] = u.copy()
            snap_i += 1

    take_snap(0.0)
    prev = guess = Ku = None
    for s in range(1, n_samples + 1):
        dE = diss = 0.0
        for _ in range(per):
            u, info = stepper.step(u, guess, Ku)
            Ku = info.Kb
            if scheme == "dg":
                # linear extrapolation of the increment
                guess = info.delta if prev is None else 2.0 * info.delta - prev
                prev = info.delta
            dE += info.d_energy
            diss += info.dissipation
            trace.steps += 1
            trace.iterations += info.iterations
        t = s * sample_every
        fld = field.with_values(u)
        _record(trace, t, fld, dE, diss, pot)
        take_snap(t)
        if check:
            E0, E1 = trace.energy[-2], trace.energy[-1]
            if np.isfinite(E1) and E1 > E0 + MONOTONE_RTOL * abs(E0) + trace.energy_atol:
                raise InstabilityError(f"energy increased from {E0!r} to {E1!r} at t={t:g}; reduce dt")
        if classify:
            kind = classify_limit(trace, fld, pot)
            if kind is not None:
                trace.termination = kind
                break
    trace.final = field.with_values(u)
    trace.snapshots[round(trace.times[-1], 12)] = u.copy()
    return trace


# -- plateau and normalisation -----------------------------------------------


def plateau(trace: FlowTrace, level: float, band: float = PLATEAU_BAND) -> tuple[float, float, float]:
    """Longest run of samples with |E - level| <= band * level.

    Returns (t_start, t_end, mean energy over the run); (nan, nan, nan) if the
    energy never enters the band.
    """
    E = np.asarray(trace.energy)
    t = np.asarray(trace.times)
    inside = np.abs(E - level) <= band * abs(level)
    best = (math.nan, math.nan, math.nan)
    best_len = -1.0
    i = 0
    while i < len(E):
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(E) and inside[j + 1]:
            j += 1
        if t[j] - t[i] > best_len:
            best_len = t[j] - t[i]
            best = (float(t[i]), float(t[j]), float(np.mean(E[i:j + 1])))
        i = j + 1
    return best


def normalize_time(trace: FlowTrace, n: int, level: float | None = None,
                   pot: PotentialSpec = DEFAULT_POTENTIAL) -> float:
    """Time at which the energy crosses 2 sigma * 1.2 * Area(S^n) (linear interpolation)."""
    lev = 1.2 * ground_level(n, pot) if level is None else level
    E = np.asarray(trace.energy)
    t = np.asarray(trace.times)
    if len(E) < 2 or not (E[0] >= lev >= E[-1]):
        raise NormalizationError(f"energy range [{E.min() if len(E) else 'nan'}, "
                                 f"{E.max() if len(E) else 'nan'}] does not bracket level {lev:g}")
    crossings = np.flatnonzero((E[:-1] >= lev) & (E[1:] < lev))
    if len(crossings) != 1:
        raise NormalizationError(f"level {lev:g} crossed {len(crossings)} times")
    i = crossings[0]
    if E[i] == E[i + 1]:
        return float(t[i])
    return float(t[i] + (t[i + 1] - t[i]) * (E[i] - lev) / (E[i] - E[i + 1]))


# -- shooting -----------------------------------------------------------------


def _angle_cos(grid: ReducedGrid, k: int, phase: float) -> np.ndarray:
    """cos(k theta_j - phase); grid-exact (integer index arithmetic) when phase is
    a multiple of dtheta, so phase shifts are exact rotations of the grid."""
    T = grid.N_theta
    j = np.arange(T)
    m = phase / grid.dtheta
    if abs(m - round(m)) < 1e-9:
        idx = (k * j - int(round(m))) % T
        return np.cos(2.0 * math.pi * idx / T)
    return np.cos(k * grid.theta - phase)


def lift_eigenfunction(f: np.ndarray, k: int, phase: float, grid: ReducedGrid, eps: float, l: int = 0) -> Field:
    """f(s) cos(k theta - phase) on the disk grid, unit norm in the weighted L2
    inner product (orbit factor included)."""
    if l != 0:
        raise ValueError("only l = 0 modes are SO(n)-invariant and lift to the disk grid")
    if k not in (0, 1):
        raise ValueError("lift_eigenfunction supports k in {0, 1}")
    if grid.kind != "disk":
        raise ValueError("lift target must be a disk grid")
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.N_s + 1,):
        raise ValueError(f"profile must have N_s + 1 = {grid.N_s + 1} values")
    if k == 0:
        img = np.repeat(f[:, None], grid.N_theta, axis=1)
        vals = np.concatenate([img[:-1].ravel(), [f[-1]]])
    else:
        ang = _angle_cos(grid, k, phase)
        vals = np.concatenate([np.outer(f[:-1], ang).ravel(), [0.0]])
    nrm = math.sqrt(grid.orbit_factor * np.dot(grid.mass, vals * vals))
    if nrm == 0:
        raise ValueError("zero profile")
    return Field(grid, vals / nrm, eps)


@dataclass
class Probe:
    t: float
    termination: Termination
    t_final: float


@dataclass
class ShootingResult:
    n: int
    eps: float
    r: float
    phase: float
    bracket: tuple[float, float]
    t_star: float
    minus_trace: FlowTrace
    plus_trace: FlowTrace
    critical_trace: FlowTrace
    plateau_energy: float
    plateau_start: float
    plateau_end: float
    normalization_time: float | None
    clifford_energy: float
    probes: list[Probe] = field(default_factory=list)
    dichotomy_violations: list[str] = field(default_factory=list)

    @property
    def plateau_duration(self) -> float:
        return self.plateau_end - self.plateau_start

    def summary(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.eps,
            "r": self.r,
            "phase": self.phase,
            "t_star": self.t_star,
            "bracket": list(self.bracket),
            "plateau_energy": self.plateau_energy,
            "plateau_start": self.plateau_start,
            "plateau_end": self.plateau_end,
            "plateau_duration": self.plateau_duration,
            "normalization_time": self.normalization_time,
            "clifford_energy": self.clifford_energy,
            "ground_level": ground_level(self.n),
            "endpoint_terminations": [self.minus_trace.termination.value, self.plus_trace.termination.value],
            "critical_termination": self.critical_trace.termination.value,
            "probes": [{"t": p.t, "termination": p.termination.value, "t_final": p.t_final} for p in self.probes],
            "dichotomy_violations": list(self.dichotomy_violations),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


@dataclass
class ShootingSetup:
    """Clifford state on the disk and the two lifted unstable eigenfunctions."""
    state: CriticalState
    base: Field
    phi1: Field
    phi2: Field
    r: float

    def initial(self, t: float) -> Field:
        if not -1.0 <= t <= 1.0:
            raise ValueError("path parameter must lie in [-1, 1]")
        v = self.base.values + self.r * t * self.phi1.values + self.r * math.sqrt(max(0.0, 1.0 - t * t)) * self.phi2.values
        return self.base.with_values(v)


def shooting_setup(n: int, eps: float, r: float | None = None, N_s: int = 256, N_theta: int = 128,
                   phase: float = 0.0, pot: PotentialSpec = DEFAULT_POTENTIAL) -> ShootingSetup:
    if N_s < min_intervals("latitude_s", eps):
        raise ValueError(f"N_s = {N_s} under-resolves eps = {eps}")
    line = ReducedGrid(n, "latitude_s", N_s)
    disk = ReducedGrid(n, "disk", N_s, N_theta)
    state = solve_clifford_state(n, eps, grid=line, pot=pot, tol=1e-12)
    _, F00 = mode_problem(state, 0, 0, 1, pot, vectors=True)
    _, F10 = mode_problem(state, 1, 0, 1, pot, vectors=True)
    base = embed_in_disk(state.field, disk)
    phi1 = lift_eigenfunction(F00[:, 0], 0, 0.0, disk, eps)
    phi2 = lift_eigenfunction(F10[:, 0], 1, phase, disk, eps)
    scale = max(np.max(np.abs(phi1.values)), np.max(np.abs(phi2.values)))
    if r is None:
        r = 0.1 / scale
    if not r > 0:
        raise ValueError("r must be positive")
    # exact pointwise range over the path: t A + sqrt(1 - t^2) B sweeps the upper
    # half circle, so its extremes are +-sqrt(A^2 + B^2) or +-|A| depending on sign(B)
    A, B = r * phi1.values, r * phi2.values
    rad = np.hypot(A, B)
    hi = base.values + np.where(B > 0, rad, np.abs(A))
    lo = base.values - np.where(B < 0, rad, np.abs(A))
    if np.max(hi) > 1.0 or np.min(lo) < -1.0:
        raise ShootingPreconditionError(f"r = {r:g} pushes initial data outside [-1, 1]")
    return ShootingSetup(state, base, phi1, phi2, r)


def shoot_connecting_orbit(n: int, eps: float, r: float | None = None, bisect_tol: float = 1e-6,
                           t_horizon: float = 200.0, N_s: int = 256, N_theta: int = 128, phase: float = 0.0,
                           dt: float | None = None, sample_every: float = 0.05, dichotomy_samples: int = 0,
                           pot: PotentialSpec = DEFAULT_POTENTIAL) -> ShootingResult:
    """Bisect along t -> u_c + r t phi1 + r sqrt(1 - t^2) phi2 for the separatrix
    between the basins of -1 and +1, and evolve its approximation."""
    if not bisect_tol > 0:
        raise ValueError("bisect_tol must be positive")
    setup = shooting_setup(n, eps, r, N_s, N_theta, phase, pot)
    probes: list[Probe] = []

    def run(t, snapshots=()):
        tr = evolve(setup.initial(t), t_horizon, sample_every, dt, pot=pot, snapshot_times=list(snapshots))
        probes.append(Probe(t, tr.termination, tr.times[-1]))
        log.info("probe t=%.9f -> %s at %.2f", t, tr.termination.value, tr.times[-1])
        return tr

    minus, plus = run(-1.0), run(1.0)
    if minus.termination != Termination.MINUS_ONE or plus.termination != Termination.PLUS_ONE:
        raise ShootingPreconditionError(
            f"endpoints terminate {minus.termination.value} / {plus.termination.value}; adjust r or t_horizon")

    violations: list[str] = []
    if dichotomy_samples > 0:
        ts = np.linspace(-1.0, 1.0, dichotomy_samples + 2)[1:-1]
        kinds = [run(float(t)).termination for t in ts]
        seq = [Termination.MINUS_ONE] + kinds + [Termination.PLUS_ONE]
        flips = sum(a != b for a, b in zip(seq, seq[1:]))
        if flips != 1:
            violations.append("classification along the path: " + ", ".join(k.value for k in seq))

    lo, hi = -1.0, 1.0
    for p in probes[2:]:
        if p.termination == Termination.MINUS_ONE and p.t > lo:
            lo = p.t
    for p in probes[2:]:
        if p.termination == Termination.PLUS_ONE and lo < p.t < hi:
            hi = p.t
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        kind = run(mid).termination
        if kind == Termination.MINUS_ONE:
            lo = mid
        elif kind == Termination.PLUS_ONE:
            hi = mid
        else:
            violations.append(f"probe t={mid!r} terminated {kind.value}")
            lo = hi = mid
            break
    t_star = 0.5 * (lo + hi)
    crit = evolve(setup.initial(t_star), t_horizon, sample_every, dt, pot=pot)
    probes.append(Probe(t_star, crit.termination, crit.times[-1]))
    level = ground_level(n, pot)
    p0, p1, pE = plateau(crit, level)
    try:
        tn = normalize_time(crit, n, pot=pot)
    except NormalizationError:
        tn = None
    return ShootingResult(
        n=n, eps=eps, r=setup.r, phase=phase, bracket=(lo, hi), t_star=t_star,
        minus_trace=minus, plus_trace=plus, critical_trace=crit,
        plateau_energy=pE, plateau_start=p0, plateau_end=p1, normalization_time=tn,
        clifford_energy=setup.state.energy, probes=probes, dichotomy_violations=violations,
    )


def clifford_area_level(n: int) -> float:
    return clifford_area((1, n - 1))
