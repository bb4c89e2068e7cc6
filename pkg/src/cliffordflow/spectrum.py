"""Morse index and nullity of 1-D critical states by separation of variables.

On the latitude_s grid the linearised operator

    L f = -Lap f + W''(u)/eps^2 f

splits over theta-modes cos(k theta) and degree-l harmonics on S^{n-1} into
Sturm-Liouville problems with the added potential k^2/cos^2 s + l(l+n-2)/sin^2 s.
On the latitude_alpha grid (ground state) only degree-l harmonics on S^n occur,
with potential l(l+n-1)/cos^2 alpha.  Eigenvalues are reported for -L, i.e. as
lambda in L f = lambda f, so negative eigenvalues are unstable directions.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .critical import CriticalState
from .grids import Field
from .potential import DEFAULT_POTENTIAL, PotentialSpec

DEFAULT_COUNT = 5
DEFAULT_MODE_MAX = 6
MAX_MODE_MAX = 48


class TruncationError(RuntimeError):
    pass


class SpectrumError(RuntimeError):
    pass


def _binom(a: int, b: int) -> int:
    return math.comb(a, b) if 0 <= b <= a else 0


def harmonic_multiplicity(n: int, l: int) -> int:
    """Dimension of degree-l spherical harmonics on S^{n-1}."""
    if n < 2 or l < 0:
        raise ValueError(f"need n >= 2 and l >= 0, got n={n}, l={l}")
    return _binom(n - 1 + l, n - 1) - _binom(n - 3 + l, n - 1)


def _as_field(state) -> Field:
    return state.field if isinstance(state, CriticalState) else state


def _mode_operator(fld: Field, k: int, l: int, pot: PotentialSpec):
    """Symmetric tridiagonal (d, e), the kept node indices and sqrt(M) on them."""
    g = fld.grid
    x = g.nodes
    n = g.n
    keep = np.ones(g.N_s + 1, dtype=bool)
    V = pot.d2W(fld.values) / fld.eps**2
    with np.errstate(divide="ignore", invalid="ignore"):
        if g.kind == "latitude_s":
            if l >= 1:
                keep[0] = False
                V = V + l * (l + n - 2) / np.sin(x) ** 2
            if k >= 1:
                keep[-1] = False
                V = V + k * k / np.cos(x) ** 2
        elif g.kind == "latitude_alpha":
            if k != 0:
                raise ValueError("latitude_alpha modes carry no theta index; use k = 0")
            if l >= 1:
                keep[0] = keep[-1] = False
                V = V + l * (l + n - 1) / np.cos(x) ** 2
        else:
            raise ValueError("mode decomposition needs a 1-D grid")
    K = g.stiffness
    M = g.mass
    kd, ko = K.diagonal(0), K.diagonal(1)
    idx = np.flatnonzero(keep)
    m = M[idx]
    d = kd[idx] / m + V[idx]
    e = ko[idx[:-1]] / np.sqrt(m[:-1] * m[1:])
    return d, e, idx, np.sqrt(m)


def mode_problem(state, k: int, l: int, count: int = DEFAULT_COUNT, pot: PotentialSpec = DEFAULT_POTENTIAL,
                 vectors: bool = False):
    """Lowest ``count`` eigenvalues of mode (k, l); with ``vectors`` also the
    eigenfunctions on all grid nodes (zero at Dirichlet ends), normalised so that
    sum M f^2 = 1 and with a positive weighted mean (or positive first lobe)."""
    if k < 0 or l < 0:
        raise ValueError("mode indices must be nonnegative")
    if count < 1:
        raise ValueError("count must be positive")
    fld = _as_field(state)
    d, e, idx, sm = _mode_operator(fld, k, l, pot)
    count = min(count, len(d))
    try:
        res = eigh_tridiagonal(d, e, eigvals_only=not vectors, select="i", select_range=(0, count - 1))
    except (LinAlgError, ValueError) as exc:
        raise SpectrumError(f"eigen-solver failed for mode (k={k}, l={l}) on {len(d)} nodes: {exc}") from exc
    if not vectors:
        return np.asarray(res)
    w, y = res
    F = np.zeros((fld.grid.N_s + 1, count))
    F[idx] = y / sm[:, None]
    M = fld.grid.mass
    for j in range(count):
        f = F[:, j]
        mean = np.dot(M, f)
        ref = mean if abs(mean) > 1e-8 * np.sqrt(np.dot(M, f * f)) else f[np.flatnonzero(np.abs(f) > 1e-8 * np.abs(f).max())[0]]
        if ref < 0:
            F[:, j] = -f
    return w, F


def mode_spectrum(state, k: int, l: int, count: int = DEFAULT_COUNT,
                  pot: PotentialSpec = DEFAULT_POTENTIAL) -> np.ndarray:
    """Sorted lowest ``count`` eigenvalues of the (k, l) Sturm-Liouville problem."""
    if count < 3:
        raise ValueError("count must be at least 3")
    return mode_problem(state, k, l, count, pot)


@dataclass
class ModeEntry:
    k: int
    l: int
    mult: int
    eigenvalues: np.ndarray

    def to_dict(self) -> dict:
        return {"k": self.k, "l": self.l, "mult": self.mult, "eigenvalues": [float(x) for x in self.eigenvalues]}


@dataclass
class ModeSpectrum:
    n: int
    eps: float
    modes: list[ModeEntry]
    delta: float
    gap_ratio: float
    morse_index: int
    nullity: int
    k_max: int
    l_max: int
    meta: dict = field(default_factory=dict)

    def entry(self, k: int, l: int) -> ModeEntry:
        for m in self.modes:
            if m.k == k and m.l == l:
                return m
        raise KeyError((k, l))

    def counts(self, delta: float | None = None) -> tuple[int, int]:
        """(index, nullity) for a given cluster half-width (default: the chosen delta)."""
        return _aggregate(self.modes, self.delta if delta is None else delta)

    def negative_counts(self) -> dict[tuple[int, int], int]:
        return {(m.k, m.l): int(np.sum(m.eigenvalues < -self.delta)) for m in self.modes}

    def null_counts(self) -> dict[tuple[int, int], int]:
        return {(m.k, m.l): int(np.sum(np.abs(m.eigenvalues) <= self.delta)) for m in self.modes}

    def monotone(self) -> bool:
        """Lowest eigenvalues strictly increase in k at fixed l and in l at fixed k."""
        low = {(m.k, m.l): m.eigenvalues[0] for m in self.modes}
        for (k, l), v in low.items():
            if (k + 1, l) in low and not low[(k + 1, l)] > v:
                return False
            if (k, l + 1) in low and not low[(k, l + 1)] > v:
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.eps,
            "delta": self.delta,
            "gap_ratio": self.gap_ratio,
            "morse_index": self.morse_index,
            "nullity": self.nullity,
            "k_max": self.k_max,
            "l_max": self.l_max,
            "modes": [m.to_dict() for m in self.modes],
            **self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "l", "mult", "j", "eigenvalue"])
        for m in self.modes:
            for j, v in enumerate(m.eigenvalues):
                w.writerow([m.k, m.l, m.mult, j, repr(float(v))])
        return buf.getvalue()


def _aggregate(modes, delta):
    index = nullity = 0
    for m in modes:
        index += m.mult * int(np.sum(m.eigenvalues < -delta))
        nullity += m.mult * int(np.sum(np.abs(m.eigenvalues) <= delta))
    return index, nullity


def choose_delta(eigenvalues, delta0: float) -> tuple[float, float]:
    """Cluster half-width delta and its gap ratio.

    |lambda| values are sorted; among the gaps whose lower side lies below the
    seed delta0, the one with the largest ratio a_{j+1}/a_j separates the
    near-zero cluster, and delta is the geometric midpoint of that gap.
    """
    a = np.unique(np.abs(np.asarray(eigenvalues, dtype=float)))
    if len(a) == 0:
        raise ValueError("no eigenvalues")
    best_j, best_ratio = -1, 0.0
    for j in range(len(a) - 1):
        if a[j] > delta0:
            break
        ratio = math.inf if a[j] == 0 else a[j + 1] / a[j]
        if ratio > best_ratio:
            best_j, best_ratio = j, ratio
    if best_j < 0:
        # empty cluster
        delta = min(delta0, 0.5 * a[0])
        return delta, (a[0] - delta) / delta
    lo, hi = a[best_j], a[best_j + 1]
    delta = math.sqrt(lo * hi) if lo > 0 else min(delta0, 0.5 * hi)
    return delta, (hi - delta) / delta


def _mult(kind: str, n: int, k: int, l: int) -> int:
    if kind == "latitude_alpha":
        return harmonic_multiplicity(n + 1, l)
    return (1 if k == 0 else 2) * harmonic_multiplicity(n, l)


def morse_count(state, k_max: int = DEFAULT_MODE_MAX, l_max: int = DEFAULT_MODE_MAX,
                count: int = DEFAULT_COUNT, pot: PotentialSpec = DEFAULT_POTENTIAL,
                delta0: float | None = None, escalate: bool = True) -> ModeSpectrum:
    """Aggregate Morse index and nullity over modes k <= k_max, l <= l_max.

    Ground states (latitude_alpha grid) only have the harmonic degree l; k_max
    is then ignored.  If a boundary mode still has an eigenvalue below +delta,
    or a mode's highest retained eigenvalue does, the truncation is doubled
    (when ``escalate``) or TruncationError is raised.
    """
    fld = _as_field(state)
    g = fld.grid
    n = g.n
    delta0 = fld.eps if delta0 is None else delta0
    if count < 3:
        raise ValueError("count must be at least 3")
    if k_max < 1 or l_max < 1:
        raise ValueError("k_max and l_max must be at least 1")
    if g.kind == "latitude_alpha":
        k_max = 0
    cache: dict[tuple[int, int], np.ndarray] = {}

    def get(k, l, c):
        ev = cache.get((k, l))
        if ev is None or len(ev) < c:
            ev = mode_problem(fld, k, l, c, pot)
            cache[(k, l)] = ev
        return ev

    while True:
        modes = []
        for k in range(k_max + 1):
            for l in range(l_max + 1):
                c = count
                ev = get(k, l, c)
                # keep at least one eigenvalue above the seed so the cluster gap is visible
                while ev[-1] <= delta0 and len(ev) == c and c < g.N_s - 1:
                    c *= 2
                    ev = get(k, l, c)
                modes.append(ModeEntry(k, l, _mult(g.kind, n, k, l), ev[:max(count, int(np.sum(ev <= delta0)) + 1)]))
        delta, ratio = choose_delta(np.concatenate([m.eigenvalues for m in modes]), delta0)
        boundary = [m for m in modes if m.l == l_max or (k_max > 0 and m.k == k_max)]
        bad = [m for m in boundary if m.eigenvalues[0] <= delta]
        if not bad:
            break
        if not escalate or max(k_max, l_max) >= MAX_MODE_MAX:
            raise TruncationError(
                f"mode ({bad[0].k}, {bad[0].l}) has eigenvalue {bad[0].eigenvalues[0]:.4g} <= delta={delta:.3g};"
                f" increase k_max/l_max (now {k_max}, {l_max})")
        if any(m.l == l_max for m in bad):
            l_max *= 2
        if k_max > 0 and any(m.k == k_max for m in bad):
            k_max *= 2
    index, nullity = _aggregate(modes, delta)
    return ModeSpectrum(n=n, eps=fld.eps, modes=modes, delta=delta, gap_ratio=ratio,
                        morse_index=index, nullity=nullity, k_max=k_max, l_max=l_max,
                        meta={"grid_kind": g.kind, "N_s": g.N_s})
