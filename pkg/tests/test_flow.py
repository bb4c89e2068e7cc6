import math

import numpy as np
import pytest

from cliffordflow.critical import solve_clifford_state
from cliffordflow.energy import energy
from cliffordflow.grids import Field, ReducedGrid, embed_in_disk
from cliffordflow.flow import (FlowTrace, InstabilityError, NormalizationError, PACStepper,
                               ShootingPreconditionError, Termination, classify_limit, dt_max, evolve,
                               geometric_times, ground_level, lift_eigenfunction, normalize_time, plateau,
                               shooting_setup, step_pac)
from cliffordflow.spectrum import mode_problem

EPS = 0.2
N_S, N_T = 64, 32


@pytest.fixture(scope="module")
def disk():
    return ReducedGrid(2, "disk", N_S, N_T)


@pytest.fixture(scope="module")
def setup():
    return shooting_setup(2, EPS, N_s=N_S, N_theta=N_T)


def const(grid, c, eps=EPS):
    return Field(grid, np.full(grid.size, c), eps)


def test_dt_max_default():
    assert dt_max(0.1) == pytest.approx(0.2 * 0.1**2)


def test_one_is_a_fixed_point(disk):
    for scheme in ("dg", "imex"):
        assert np.array_equal(step_pac(const(disk, 1.0), scheme=scheme).values, np.ones(disk.size))


def test_constant_matches_scalar_ode():
    # eps u' = -W'(u)/eps has u(t)^2 = 1 / (1 + (1/u0^2 - 1) exp(-2 t / eps^2))
    g = ReducedGrid(2, "latitude_s", 64)
    u0 = 0.5
    errs = []
    for dt in (0.05 * EPS**2, 0.025 * EPS**2):
        u = step_pac(const(g, u0), dt=dt).values
        exact = 1.0 / math.sqrt(1.0 + (1.0 / u0**2 - 1.0) * math.exp(-2.0 * dt / EPS**2))
        assert np.ptp(u) < 1e-12
        errs.append(abs(u[0] - exact))
        assert errs[-1] < (dt / EPS**2) ** 2
    # one step of a second-order scheme: local error O(dt^3) once dt/eps^2 is small
    assert math.log2(errs[0] / errs[1]) > 2.7


@pytest.mark.parametrize("c, target", [(0.1, Termination.PLUS_ONE), (-0.1, Termination.MINUS_ONE)])
def test_small_constants_flow_to_wells(disk, c, target):
    tr = evolve(const(disk, c), t_end=5.0)
    assert tr.termination == target
    assert tr.energy_monotone()
    assert np.max(tr.dissipation_defects()) < 1e-3


def test_clifford_state_is_stationary(setup):
    st = PACStepper(setup.base.grid, EPS, dt_max(EPS))
    b, info = st.step(setup.base.values)
    w = setup.base.grid.mass
    change = math.sqrt(np.dot(w, info.delta**2) / w.sum())
    assert change / st.dt < 1e-8


def test_perturbed_clifford_state_decays_to_plus_one(setup):
    tr = evolve(setup.base.with_values(setup.base.values + 0.01 * setup.phi1.values), t_end=20.0)
    assert tr.termination == Termination.PLUS_ONE
    assert tr.energy_monotone()
    assert np.max(tr.dissipation_defects()) < 1e-3
    assert tr.energy_drift() < 1e-9
    assert min(tr.min_u) >= -1.05 and max(tr.max_u) <= 1.05


def test_odd_equivariance_is_exact(setup):
    u0 = setup.initial(0.3)
    a = evolve(u0, t_end=1.0, classify=False)
    b = evolve(-u0, t_end=1.0, classify=False)
    assert a.snapshots.keys() == b.snapshots.keys()
    for t in a.snapshots:
        assert np.array_equal(a.snapshots[t], -b.snapshots[t])
    assert a.energy == b.energy


def test_rotation_equivariance_small_grid():
    quarter = 0.5 * math.pi  # N_T / 4 grid steps
    s0 = shooting_setup(2, EPS, N_s=N_S, N_theta=N_T, phase=0.0)
    s1 = shooting_setup(2, EPS, N_s=N_S, N_theta=N_T, phase=quarter)
    g = s0.base.grid
    i0 = g.to_image(s0.initial(0.2).values)
    i1 = g.to_image(s1.initial(0.2).values)
    assert np.array_equal(np.roll(i0, N_T // 4, axis=1), i1)
    a = evolve(s0.initial(0.2), t_end=2.0, classify=False)
    b = evolve(s1.initial(0.2), t_end=2.0, classify=False)
    for t in a.snapshots:
        rot = np.roll(g.to_image(a.snapshots[t]), N_T // 4, axis=1)
        assert np.max(np.abs(rot - g.to_image(b.snapshots[t]))) < 1e-10


def test_imex_fails_dissipation_identity(setup):
    # the reason the energy-exact stepper is the default
    tr = evolve(setup.initial(1.0), t_end=3.0, scheme="imex")
    assert tr.energy_monotone()
    assert np.max(tr.dissipation_defects()) > 1e-3
    dg = evolve(setup.initial(1.0), t_end=3.0)
    assert np.max(dg.dissipation_defects()) < 1e-3


def test_instability_detected(disk):
    # explicit reaction: a constant offset from 1 is multiplied by 1 - 2 dt/eps^2 = -2 per step
    u = const(disk, 1.01)
    dt = 1.5 * EPS**2
    with pytest.raises(InstabilityError):
        evolve(u, t_end=10 * dt, sample_every=dt, dt=dt, scheme="imex")


def test_evolve_argument_validation(disk):
    with pytest.raises(ValueError):
        evolve(const(disk, 0.1), t_end=0.0)
    with pytest.raises(ValueError):
        evolve(const(disk, 0.1), t_end=1.0, sample_every=-1.0)
    with pytest.raises(ValueError):
        step_pac(const(disk, 0.1), dt=0.0)
    with pytest.raises(ValueError):
        PACStepper(disk, EPS, 0.01, scheme="rk4")


def test_snapshots_and_sampling(disk):
    tr = evolve(const(disk, 0.3), t_end=0.5, sample_every=0.1, classify=False)
    assert tr.times == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
    assert 0.1 / tr.dt == pytest.approx(round(0.1 / tr.dt))
    assert 0.0 in tr.snapshots and 0.5 in tr.snapshots
    assert tr.final is not None
    times = geometric_times(200.0)
    assert times[0] == 0.0 and times[1] == pytest.approx(0.01) and times[-1] == pytest.approx(200.0)
    assert np.allclose(np.diff(np.log(times[1:])), math.log(times[2] / times[1]))
    assert tr.to_csv().splitlines()[0] == "t,energy,dissipation,min_u,max_u,mass,area_estimate"


# -- classification, plateau, normalisation on synthetic traces ---------------

def synthetic(times, energies, grad=1.0):
    tr = FlowTrace(2, EPS, 0.01, "dg")
    tr.times = list(times)
    tr.energy = list(energies)
    tr.grad_norm = [grad] * len(times)
    return tr


def test_classify_limit_cases(disk):
    tr = synthetic([0, 1], [1, 1])
    assert classify_limit(tr, const(disk, 0.99)) == Termination.PLUS_ONE
    assert classify_limit(tr, const(disk, -0.97)) == Termination.MINUS_ONE
    assert classify_limit(tr, const(disk, 2.0)) == Termination.DIVERGED
    assert classify_limit(tr, const(disk, np.nan)) == Termination.DIVERGED
    assert classify_limit(tr, const(disk, 0.5)) is None
    lev = ground_level(2)
    assert classify_limit(synthetic([0, 1], [lev, lev], grad=1e-10), const(disk, 0.5)) == Termination.NONCONSTANT
    assert classify_limit(synthetic([0], [1]), const(disk, 1.0)) is None


def test_plateau_longest_run():
    lev = 10.0
    E = [20, 10.2, 10.1, 15, 10.4, 10.3, 10.2, 9.8, 2, 1]
    t0, t1, mean = plateau(synthetic(range(10), E), lev)
    assert (t0, t1) == (4.0, 7.0)
    assert mean == pytest.approx(np.mean([10.4, 10.3, 10.2, 9.8]))
    assert all(math.isnan(x) for x in plateau(synthetic(range(3), [30, 20, 0]), lev))


def test_normalize_time():
    lev = 1.2 * ground_level(2)
    tr = synthetic([0, 1, 2, 3], [2 * lev, 1.5 * lev, 0.5 * lev, 0.1 * lev])
    assert normalize_time(tr, 2) == pytest.approx(1.5)
    # lowering the level moves the crossing later
    assert normalize_time(tr, 2, level=0.8 * lev) > normalize_time(tr, 2)
    with pytest.raises(NormalizationError):
        normalize_time(synthetic([0, 1], [0.9 * lev, 0.1 * lev]), 2)
    with pytest.raises(NormalizationError):
        normalize_time(synthetic([0, 1, 2, 3], [2 * lev, 0.9 * lev, 1.1 * lev, 0.5 * lev]), 2)


# -- lifting and the shooting set-up ------------------------------------------

def test_lift_contract(setup, disk):
    st = setup.state
    _, F = mode_problem(st, 1, 0, 1, vectors=True)
    f = lift_eigenfunction(F[:, 0], 1, 0.0, disk, EPS)
    img = disk.to_image(f.values)
    norm = math.sqrt(disk.orbit_factor * np.dot(disk.mass, f.values**2))
    assert norm == pytest.approx(1.0, rel=1e-12)
    # k = 1 lifts vanish at theta = pi/2 and 3pi/2 and at the centre
    assert np.max(np.abs(img[:, [N_T // 4, 3 * N_T // 4]])) < 1e-15
    assert f.values[-1] == 0.0
    g0 = lift_eigenfunction(F[:, 0], 0, 0.0, disk, EPS)
    assert np.ptp(disk.to_image(g0.values), axis=1).max() == 0.0
    with pytest.raises(ValueError):
        lift_eigenfunction(F[:, 0], 0, 0.0, disk, EPS, l=1)
    with pytest.raises(ValueError):
        lift_eigenfunction(F[:, 0], 2, 0.0, disk, EPS)
    with pytest.raises(ValueError):
        lift_eigenfunction(F[:-1, 0], 1, 0.0, disk, EPS)


def test_shooting_setup(setup):
    assert setup.base.grid.kind == "disk"
    assert np.max(np.abs(setup.r * setup.phi1.values)) == pytest.approx(0.1) or \
        np.max(np.abs(setup.r * setup.phi2.values)) == pytest.approx(0.1)
    assert energy(setup.base) == pytest.approx(setup.state.energy, rel=1e-12)
    for t in (-1.0, -0.3, 0.0, 0.7, 1.0):
        assert np.max(np.abs(setup.initial(t).values)) <= 1.0
    with pytest.raises(ValueError):
        setup.initial(1.5)
    with pytest.raises(ShootingPreconditionError):
        shooting_setup(2, EPS, r=50.0, N_s=N_S, N_theta=N_T)
    with pytest.raises(ValueError):
        shooting_setup(2, EPS, N_s=16, N_theta=N_T)


def test_embedded_state_matches_line_state():
    line = solve_clifford_state(2, EPS, grid=ReducedGrid(2, "latitude_s", N_S))
    U = embed_in_disk(line.field, ReducedGrid(2, "disk", N_S, N_T))
    assert energy(U) == pytest.approx(line.energy, rel=1e-12)
