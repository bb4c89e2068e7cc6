import math

import numpy as np
import pytest

from cliffordflow.critical import (DegenerateStateError, NonconvergenceError, continuation_sweep,
                                   expected_clifford_energy, expected_ground_energy, newton_solve, nodal_points,
                                   solve_clifford_state, solve_ground_state)
from cliffordflow.energy import energy, residual_norm
from cliffordflow.grids import Field, ReducedGrid, clifford_latitude


@pytest.mark.parametrize("n", [2, 3, 4])
def test_clifford_state_energy_and_nodal_point(clifford_states, n):
    st = clifford_states[n]
    assert st.residual < 1e-10
    assert abs(st.energy / expected_clifford_energy(n) - 1) < 0.03
    assert len(st.nodal_points) == 1
    assert abs(math.tan(st.nodal_points[0]) ** 2 - (n - 1)) < 0.02


def test_clifford_example_value(clifford_states):
    # 2 sigma * 2 pi^2 with sigma = sqrt(2)/3
    assert expected_clifford_energy(2) == pytest.approx(18.6103, abs=1e-4)
    assert clifford_states[2].energy == pytest.approx(18.6103, rel=0.03)


@pytest.mark.parametrize("n", [2, 3])
def test_ground_state(ground_states, n):
    st = ground_states[n]
    assert st.residual < 1e-10
    assert abs(st.energy / expected_ground_energy(n) - 1) < 0.03
    assert st.nodal_points == pytest.approx([0.0], abs=1e-10)
    u = st.field.values
    assert np.max(np.abs(u + u[::-1])) < 1e-10


def test_ground_example_value():
    assert expected_ground_energy(2) == pytest.approx(11.848, abs=1e-3)


@pytest.mark.parametrize("n", [2, 3])
def test_energy_ordering(clifford_states, ground_states, n):
    zero = clifford_states[n].field.with_values(np.zeros(clifford_states[n].field.grid.size))
    assert 0 < ground_states[n].energy < clifford_states[n].energy < energy(zero)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_clifford_state_monotone(clifford_states, n):
    u = clifford_states[n].field.values
    assert np.all(np.diff(u) > 0) or np.all(np.diff(u) < 0)
    assert np.max(np.abs(u)) <= 1.0


@pytest.mark.parametrize("n", [2, 3])
def test_nodal_localization_two_resolutions(n):
    eps = 0.05
    for N in (512, 1024):
        s0 = solve_clifford_state(n, eps, grid=ReducedGrid(n, "latitude_s", N)).nodal_points[0]
        h = (math.pi / 2) / N
        assert abs(s0 - clifford_latitude(n)) < eps + h * h
        g0 = solve_ground_state(n, eps, grid=ReducedGrid(n, "latitude_alpha", 2 * N)).nodal_points[0]
        assert abs(g0) < eps + h * h


def test_nodal_points_interpolation():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    assert nodal_points(x, np.array([-1.0, 1.0, 1.0, -3.0])) == [0.5, 2.25]
    assert nodal_points(x, np.array([0.0, 1.0, 2.0, 3.0])) == [0.0]
    assert nodal_points(x, np.ones(4)) == []


def test_resolution_guard():
    with pytest.raises(ValueError, match="eps/h"):
        solve_clifford_state(2, 0.05, grid=ReducedGrid(2, "latitude_s", 64))


def test_wrong_grid_kind():
    with pytest.raises(ValueError):
        solve_clifford_state(2, 0.1, grid=ReducedGrid(2, "latitude_alpha", 512))
    with pytest.raises(ValueError):
        solve_ground_state(3, 0.1, grid=ReducedGrid(2, "latitude_alpha", 512))


def test_degenerate_state_rejected():
    g = ReducedGrid(2, "latitude_s", 256)
    with pytest.raises(DegenerateStateError) as info:
        solve_clifford_state(2, 0.1, grid=g, init=Field(g, np.full(g.size, 0.9), 0.1))
    assert info.value.state is not None
    # above the bifurcation from u = 0 (1/eps^2 < 2(n+2)) only constants remain
    with pytest.raises(DegenerateStateError):
        solve_clifford_state(2, 0.5)


def test_nonconvergence_carries_last_iterate():
    g = ReducedGrid(2, "latitude_s", 256)
    start = Field(g, np.tanh((g.nodes - 0.5) / 0.3), 0.1)
    with pytest.raises(NonconvergenceError) as info:
        newton_solve(start, tol=1e-14, max_iter=1)
    last = info.value.last
    assert last is not None
    assert residual_norm(last) < residual_norm(start)


def test_continuation_sweep():
    states = continuation_sweep(2, [0.2, 0.1, 0.05], "clifford", N_s=512)
    ratios = [st.energy / expected_clifford_energy(2) for st in states]
    assert [st.eps for st in states] == [0.2, 0.1, 0.05]
    assert ratios[0] < ratios[1] < ratios[2] < 1.0
    assert all(st.residual < 1e-10 for st in states)
    assert continuation_sweep(2, []) == []


@pytest.mark.parametrize("eps_list", [[0.1, 0.1], [0.05, 0.1], [0.2, 0.05]])
def test_continuation_validation(eps_list):
    with pytest.raises(ValueError):
        continuation_sweep(2, eps_list)


def test_summary_fields(clifford_states):
    d = clifford_states[2].summary()
    assert d["kind"] == "clifford" and d["n"] == 2 and d["N_s"] == 1024
    assert d["energy"] == clifford_states[2].energy
