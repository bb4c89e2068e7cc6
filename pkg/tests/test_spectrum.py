import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliffordflow.critical import solve_clifford_state
from cliffordflow.grids import Field, ReducedGrid
from cliffordflow.spectrum import (ModeSpectrum, TruncationError, choose_delta, harmonic_multiplicity,
                                   mode_problem, mode_spectrum, morse_count)


@pytest.fixture(scope="module")
def spectra(clifford_states):
    return {n: morse_count(clifford_states[n]) for n in (2, 3, 4)}


@pytest.mark.parametrize("n, l, mult", [(4, 2, 9), (3, 1, 3), (2, 5, 2), (2, 0, 1), (3, 2, 5)])
def test_harmonic_multiplicity_examples(n, l, mult):
    assert harmonic_multiplicity(n, l) == mult


@given(st.integers(2, 12), st.integers(0, 30))
def test_harmonic_multiplicity_formula(n, l):
    # dimension of homogeneous degree-l polynomials minus those of degree l - 2
    hom = lambda d: math.comb(d + n - 1, n - 1) if d >= 0 else 0  # noqa: E731
    assert harmonic_multiplicity(n, l) == hom(l) - hom(l - 2)


def test_harmonic_multiplicity_domain():
    with pytest.raises(ValueError):
        harmonic_multiplicity(1, 0)
    with pytest.raises(ValueError):
        harmonic_multiplicity(3, -1)


def test_constant_one_spectrum():
    g = ReducedGrid(2, "latitude_s", 256)
    eps = 0.1
    ev = mode_spectrum(Field(g, np.ones(g.size), eps), 0, 0, count=3)
    assert ev[0] == pytest.approx(2 / eps**2, rel=1e-12)
    assert np.all(np.diff(ev) > 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_index_and_nullity(spectra, n):
    sp = spectra[n]
    assert sp.morse_index == n + 3
    assert sp.nullity == 2 * n
    assert sp.gap_ratio >= 10
    neg = sp.negative_counts()
    assert neg[(0, 0)] == 1 and neg[(1, 0)] == 1 and neg[(0, 1)] == 1
    assert sum(neg.values()) == 3
    assert sp.entry(1, 0).mult == 2 and sp.entry(0, 1).mult == n
    assert sp.monotone()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_index_stable_under_delta(spectra, n):
    sp = spectra[n]
    for f in (0.5, 0.75, 1.0, 1.5, 2.0):
        assert sp.counts(f * sp.delta) == (sp.morse_index, sp.nullity)


@pytest.mark.parametrize("n", [2, 3])
def test_eigenvalue_monotonicity_all_modes(spectra, n):
    sp = spectra[n]
    low = {(m.k, m.l): m.eigenvalues for m in sp.modes}
    for (k, l), ev in low.items():
        if (k + 1, l) in low:
            assert low[(k + 1, l)][0] > ev[0]
        if (k, l + 1) in low:
            assert low[(k, l + 1)][0] > ev[0]
        assert np.all(np.diff(ev) > 0)


@pytest.mark.parametrize("k, l", [(0, 0), (1, 0), (0, 1), (2, 3)])
def test_eigenvectors_orthonormal(clifford_states, k, l):
    st_ = clifford_states[3]
    w, F = mode_problem(st_, k, l, count=6, vectors=True)
    M = st_.field.grid.mass
    G = F.T @ (M[:, None] * F)
    assert np.max(np.abs(G - np.eye(6))) < 1e-8
    if l >= 1:
        assert np.all(F[0] == 0)
    if k >= 1:
        assert np.all(F[-1] == 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_lowest_eigenfunction_sign_definite(clifford_states, n):
    _, F = mode_problem(clifford_states[n], 0, 0, count=3, vectors=True)
    f = F[:, 0]
    assert np.all(f > 0)


@pytest.mark.parametrize("n", [2, 3])
def test_convergence_under_grid_doubling(n):
    coarse = morse_count(solve_clifford_state(n, 0.05, grid=ReducedGrid(n, "latitude_s", 1024)))
    fine = morse_count(solve_clifford_state(n, 0.05, grid=ReducedGrid(n, "latitude_s", 2048)))
    for m in coarse.modes:
        a = m.eigenvalues[0]
        b = fine.entry(m.k, m.l).eigenvalues[0]
        assert abs(a - b) < 1e-3 * max(abs(a), 1.0), (m.k, m.l, a, b)
    assert (fine.morse_index, fine.nullity) == (coarse.morse_index, coarse.nullity)


def test_ground_state_index(ground_states):
    sp = morse_count(ground_states[2])
    assert sp.morse_index == 1
    assert sp.nullity == 3
    assert sp.k_max == 0
    assert sp.gap_ratio >= 10


def test_truncation_error_without_escalation(clifford_states):
    with pytest.raises(TruncationError):
        morse_count(clifford_states[2], k_max=1, l_max=1, escalate=False)
    sp = morse_count(clifford_states[2], k_max=1, l_max=1)
    assert sp.k_max >= 2 and sp.l_max >= 2
    assert (sp.morse_index, sp.nullity) == (5, 4)


def test_argument_validation(clifford_states):
    with pytest.raises(ValueError):
        mode_spectrum(clifford_states[2], 0, 0, count=2)
    with pytest.raises(ValueError):
        mode_problem(clifford_states[2], -1, 0)
    with pytest.raises(ValueError):
        morse_count(clifford_states[2], k_max=0)


def test_choose_delta():
    delta, ratio = choose_delta([-400.0, -100.0, 1e-4, -2e-4, 50.0, 60.0], 0.05)
    assert delta == pytest.approx(math.sqrt(2e-4 * 50.0))
    assert ratio == pytest.approx((50.0 - delta) / delta)
    # empty cluster: nothing below the seed
    delta, _ = choose_delta([-3.0, 4.0], 0.05)
    assert delta == 0.05


def test_report_formats(spectra):
    sp: ModeSpectrum = spectra[2]
    d = sp.to_dict()
    for key in ("n", "epsilon", "delta", "gap_ratio", "modes", "morse_index", "nullity"):
        assert key in d
    assert d["modes"][0].keys() == {"k", "l", "mult", "eigenvalues"}
    lines = sp.to_csv().splitlines()
    assert lines[0] == "k,l,mult,j,eigenvalue"
    assert len(lines) == 1 + sum(len(m.eigenvalues) for m in sp.modes)
    assert sp.to_json() == sp.to_json()
