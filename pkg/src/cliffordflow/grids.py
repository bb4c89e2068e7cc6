"""Symmetry-reduced grids on S^{n+1} and fields living on them.

Three reductions are supported:

* ``latitude_s``: functions of s alone, where cos^2 s = x1^2 + x2^2.  The
  orbit through s is S^1(cos s) x S^{n-1}(sin s); volume weight
  w(s) = cos s sin^{n-1} s on [0, pi/2].
* ``latitude_alpha``: functions of x1 = sin(alpha) alone; slices are S^n(cos alpha),
  weight v(alpha) = cos^n alpha on [-pi/2, pi/2].
* ``disk``: SO(n)-invariant functions of (s, theta).  This is the unit disk in
  the (x1, x2)-plane in polar form (r = cos s); s = pi/2 is its centre, where
  the theta-circle collapses, and s = 0 its rim, where S^{n-1} collapses.

All grids are vertex-centred finite-volume grids with uniform spacing.  Node
masses are the midpoint rule h*w(s_i) in the interior and the exact half-cell
integral at the two end nodes, where w vanishes.  Fluxes use the weight at the
half-node.  The disk centre is a single unknown shared by all theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad

from .geometry import sphere_area

KINDS = ("latitude_s", "latitude_alpha", "disk")

HALF_PI = 0.5 * math.pi


def _lat_s_weight(s, n):
    return np.cos(s) * np.sin(s) ** (n - 1)


@dataclass(frozen=True, eq=False)
class ReducedGrid:
    n: int
    kind: str
    N_s: int
    N_theta: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if self.N_s < 4:
            raise ValueError("need at least 4 intervals")
        if self.kind == "disk" and self.N_theta < 4:
            raise ValueError("disk grid needs N_theta >= 4")

    # -- coordinates -----------------------------------------------------

    @property
    def length(self) -> float:
        return math.pi if self.kind == "latitude_alpha" else HALF_PI

    @property
    def h(self) -> float:
        return self.length / self.N_s

    @cached_property
    def nodes(self) -> np.ndarray:
        """1-D node coordinates (s or alpha), N_s + 1 of them."""
        lo = -HALF_PI if self.kind == "latitude_alpha" else 0.0
        return lo + self.h * np.arange(self.N_s + 1)

    @cached_property
    def theta(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.N_theta) / self.N_theta

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.N_theta

    @property
    def size(self) -> int:
        if self.kind == "disk":
            return self.N_s * self.N_theta + 1
        return self.N_s + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.size,)

    def weight(self, x):
        """Volume weight of the reduced coordinate (w(s) or v(alpha))."""
        if self.kind == "latitude_alpha":
            return np.cos(x) ** self.n
        return _lat_s_weight(x, self.n)

    @property
    def orbit_factor(self) -> float:
        """Area of the orbit factor suppressed by the reduction."""
        if self.kind == "latitude_s":
            return 2.0 * math.pi * sphere_area(self.n - 1)
        if self.kind == "latitude_alpha":
            return sphere_area(self.n)
        return sphere_area(self.n - 1)

    @cached_property
    def volume(self) -> float:
        """Vol(S^{n+1}) divided by the orbit factor (the exact value of int 1)."""
        return sphere_area(self.n + 1) / self.orbit_factor

    # -- 1-D building blocks --------------------------------------------

    @cached_property
    def mass_1d(self) -> np.ndarray:
        h, n = self.h, self.n
        x = self.nodes
        m = h * self.weight(x)
        if self.kind == "latitude_alpha":
            end, _ = quad(lambda t: math.sin(t) ** n, 0.0, 0.5 * h, epsabs=0.0, epsrel=1e-13)
            m[0] = m[-1] = end
        else:
            m[0] = math.sin(0.5 * h) ** n / n
            m[-1] = (1.0 - math.cos(0.5 * h) ** n) / n
        return m

    @cached_property
    def face_1d(self) -> np.ndarray:
        """w(x_{i+1/2}) / h for the N_s faces."""
        xf = self.nodes[:-1] + 0.5 * self.h
        return self.weight(xf) / self.h

    # -- assembled operators --------------------------------------------

    @cached_property
    def mass(self) -> np.ndarray:
        """Diagonal mass per unknown (without the orbit factor)."""
        if self.kind != "disk":
            return self.mass_1d.copy()
        m = self.mass_1d
        ring = np.repeat(m[:-1] * self.dtheta, self.N_theta)
        return np.concatenate([ring, [2.0 * math.pi * m[-1]]])

    @cached_property
    def angular_coupling(self) -> np.ndarray:
        """Per-ring theta coupling m_i / (cos^2 s_i dtheta) for rings 0..N_s-1."""
        s = self.nodes[:-1]
        return self.mass_1d[:-1] / (np.cos(s) ** 2 * self.dtheta)

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        """Symmetric positive semidefinite K with u.K.u = sum of weighted |grad u|^2."""
        if self.kind != "disk":
            f = self.face_1d
            n1 = self.N_s + 1
            main = np.zeros(n1)
            main[:-1] += f
            main[1:] += f
            return sp.diags([-f, main, -f], [-1, 0, 1], shape=(n1, n1), format="csr")
        N, T = self.N_s, self.N_theta
        dth = self.dtheta
        f = self.face_1d
        pole = N * T
        idx = np.arange(N * T).reshape(N, T)
        # radial edges between rings, ring N-1 to the pole, then angular edges
        a = np.concatenate([idx[:-1].ravel(), idx[-1], idx.ravel()])
        b = np.concatenate([idx[1:].ravel(), np.full(T, pole), np.roll(idx, -1, axis=1).ravel()])
        c = np.concatenate([np.repeat(f[:-1] * dth, T), np.full(T, f[-1] * dth),
                            np.repeat(self.angular_coupling, T)])
        rows = np.concatenate([a, b, a, b])
        cols = np.concatenate([a, b, b, a])
        vals = np.concatenate([c, c, -c, -c])
        K = sp.coo_matrix((vals, (rows, cols)), shape=(self.size, self.size)).tocsr()
        K.sum_duplicates()
        return K

    @cached_property
    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(i, j, c) for every stiffness edge: u.K.u = sum c (u_i - u_j)^2."""
        K = sp.triu(self.stiffness, k=1).tocoo()
        return K.row, K.col, -K.data

    # -- conversions ----------------------------------------------------

    def to_image(self, values: np.ndarray) -> np.ndarray:
        """Disk values as an (N_s + 1, N_theta) array, pole row broadcast."""
        if self.kind != "disk":
            return np.asarray(values)
        N, T = self.N_s, self.N_theta
        img = np.empty((N + 1, T))
        img[:N] = values[:-1].reshape(N, T)
        img[N] = values[-1]
        return img

    def from_image(self, img: np.ndarray) -> np.ndarray:
        """Inverse of ``to_image``; the pole takes the theta-mean of the last row."""
        if self.kind != "disk":
            return np.asarray(img, dtype=float)
        img = np.asarray(img, dtype=float)
        return np.concatenate([img[:-1].ravel(), [img[-1].mean()]])

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Per-unknown coordinates: (x,) for 1-D grids, (s, theta) for the disk."""
        if self.kind != "disk":
            return (self.nodes,)
        N, T = self.N_s, self.N_theta
        s = np.concatenate([np.repeat(self.nodes[:-1], T), [HALF_PI]])
        th = np.concatenate([np.tile(self.theta, N), [0.0]])
        return s, th

    def describe(self) -> dict:
        d = {"n": self.n, "grid_kind": self.kind, "N_s": self.N_s}
        if self.kind == "disk":
            d["N_theta"] = self.N_theta
        return d

    def resolution_ok(self, eps: float, ratio: float = 8.0) -> bool:
        return eps / self.h >= ratio


def min_intervals(kind: str, eps: float, ratio: float = 8.0) -> int:
    """Smallest N_s with eps / h >= ratio."""
    length = math.pi if kind == "latitude_alpha" else HALF_PI
    return int(math.ceil(ratio * length / eps))


def clifford_latitude(n: int) -> float:
    """s* with tan^2 s* = n - 1, the latitude of T_{1,n-1}."""
    return math.atan(math.sqrt(n - 1))


@dataclass(frozen=True, eq=False)
class Field:
    grid: ReducedGrid
    values: np.ndarray
    eps: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values, self.eps)

    def __neg__(self):
        return self.with_values(-self.values)

    @property
    def n(self) -> int:
        return self.grid.n


def embed_in_disk(field: Field, grid: ReducedGrid) -> Field:
    """Lift a latitude_s field to a theta-independent disk field on matching nodes."""
    if field.grid.kind != "latitude_s" or grid.kind != "disk":
        raise ValueError("embed_in_disk maps latitude_s fields onto disk grids")
    if grid.N_s != field.grid.N_s or grid.n != field.grid.n:
        raise ValueError("grids must share n and N_s")
    u = field.values
    vals = np.concatenate([np.repeat(u[:-1], grid.N_theta), [u[-1]]])
    return Field(grid, vals, field.eps)
