"""Compiled inner loops for the time stepper."""

import numba as nb


@nb.njit(cache=True)
def ldl_solve_columns(d, e, b):
    """In-place solve of L D L^T x = b for every column of b.

    d holds the reciprocals of the pivots, shape (m, K); e has shape (m - 1, K):
    one factored SPD tridiagonal system (LAPACK pttrf form) per column.
    b may be complex.
    """
    m, K = b.shape
    for i in range(1, m):
        for k in range(K):
            b[i, k] -= e[i - 1, k] * b[i - 1, k]
    for k in range(K):
        b[m - 1, k] *= d[m - 1, k]
    for i in range(m - 2, -1, -1):
        for k in range(K):
            b[i, k] = b[i, k] * d[i, k] - e[i, k] * b[i + 1, k]


@nb.njit(cache=True)
def quartic_rhs(lin, M, a, delta, shift, inv_eps, out):
    """out = lin - M (Q(a, a + delta) - shift delta) / eps for W = (1 - u^2)^2 / 4."""
    for i in range(a.shape[0]):
        x = a[i]
        y = x + delta[i]
        q = 0.25 * (x + y) * (x * x + y * y - 2.0)
        out[i] = lin[i] - M[i] * (q - shift * delta[i]) * inv_eps


@nb.njit(cache=True)
def change_and_scale(new, old):
    c = 0.0
    s = 0.0
    for i in range(new.shape[0]):
        v = abs(new[i] - old[i])
        if v > c or v != v:
            c = v
        w = abs(new[i])
        if w > s:
            s = w
    return c, s


@nb.njit(cache=True)
def disk_stiffness_apply(u, f, c, dth, out):
    """out = K u on the disk grid: rings of length T, then the centre unknown.

    f are the N radial face weights (the last one joins ring N-1 to the centre),
    c the N per-ring angular couplings.
    """
    N = f.shape[0]
    T = (u.shape[0] - 1) // N
    p = u[N * T]
    acc = 0.0
    for i in range(N):
        fi = dth * f[i]
        fm = dth * f[i - 1] if i > 0 else 0.0
        ci = c[i]
        for j in range(T):
            x = u[i * T + j]
            up = u[(i + 1) * T + j] if i < N - 1 else p
            v = fi * (x - up) + ci * (2.0 * x - u[i * T + (j + 1) % T] - u[i * T + (j - 1) % T])
            if i > 0:
                v += fm * (x - u[(i - 1) * T + j])
            out[i * T + j] = v
        if i == N - 1:
            for j in range(T):
                acc += fi * (p - u[i * T + j])
    out[N * T] = acc
