"""Areas of round spheres and Clifford hypersurfaces T_{p,q} in S^{p+q+1}.

Everything here works in log-space: terms such as (x+2)^(x+2) overflow a
double long before the dimensions we care about (n ~ 200), while their logs
stay O(n log n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

SQRT2 = math.sqrt(2.0)
SQRT_2PI_E = math.sqrt(2.0 * math.pi / math.e)

# strict inequalities must hold by at least this much
MARGIN = 1e-12


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


@dataclass(frozen=True)
class CliffordSpec:
    p: int
    q: int

    def __post_init__(self):
        if int(self.p) != self.p or int(self.q) != self.q or self.p < 1 or self.q < 1:
            raise DomainError(f"Clifford hypersurface needs p, q >= 1, got ({self.p}, {self.q})")

    @property
    def n(self) -> int:
        return self.p + self.q


@dataclass
class AppendixReport:
    checked_range: tuple[int, int]
    failures: list[tuple[str, object, str]] = field(default_factory=list)
    checks: int = 0
    a_prefix: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "checked_range": list(self.checked_range),
            "checks": self.checks,
            "pass": self.passed,
            "failures": [{"lemma": a, "argument": b, "detail": c} for a, b, c in self.failures],
            "a_prefix": self.a_prefix,
        }


# ---------------------------------------------------------------------------
# areas


def log_unit_sphere_area(n: int) -> float:
    """log Area(S^n(1)) = log(2 pi^{(n+1)/2} / Gamma((n+1)/2))."""
    if n < 1:
        raise DomainError(f"sphere dimension must be >= 1, got {n}")
    return math.log(2.0) + 0.5 * (n + 1) * math.log(math.pi) - float(gammaln(0.5 * (n + 1)))


def log_sphere_area(n: int, radius: float = 1.0) -> float:
    if radius <= 0:
        raise DomainError(f"radius must be positive, got {radius}")
    return log_unit_sphere_area(n) + n * math.log(radius)


def sphere_area(n: int, radius: float = 1.0) -> float:
    """Area of the round n-sphere of the given radius."""
    return math.exp(log_sphere_area(n, radius))


def sphere_area_factorial(n: int) -> float:
    """Area(S^n(1)) from the odd/even factorial form (independent of lgamma).

    Only used as a cross-check for moderate n.
    """
    if n < 1:
        raise DomainError(f"sphere dimension must be >= 1, got {n}")
    if n % 2 == 1:
        m = (n + 1) // 2
        return (n + 1) * math.pi**m / math.factorial(m)
    dfact = math.prod(range(n + 1, 0, -2))
    return (n + 1) * math.pi ** (n // 2) * 2 ** ((n + 2) // 2) / dfact


def log_clifford_area(spec: CliffordSpec) -> float:
    p, q, n = spec.p, spec.q, spec.n
    return log_sphere_area(p, math.sqrt(p / n)) + log_sphere_area(q, math.sqrt(q / n))


def clifford_area(spec: CliffordSpec | tuple[int, int]) -> float:
    """Area of T_{p,q} = S^p(sqrt(p/n)) x S^q(sqrt(q/n))."""
    if not isinstance(spec, CliffordSpec):
        spec = CliffordSpec(*spec)
    return math.exp(log_clifford_area(spec))


def density_ratio(n: int) -> float:
    """d(n) = Area(T_{1,n-1}) / Area(S^n)."""
    if n < 2:
        raise DomainError(f"density ratio needs n >= 2, got {n}")
    return math.exp(log_clifford_area(CliffordSpec(1, n - 1)) - log_unit_sphere_area(n))


def min_clifford(n: int) -> tuple[CliffordSpec, float]:
    """Least-area T_{p,q} with p + q = n, found by exhaustive search over p <= q."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    best = None
    for p in range(1, n // 2 + 1):
        spec = CliffordSpec(p, n - p)
        la = log_clifford_area(spec)
        if best is None or la < best[1]:
            best = (spec, la)
    return best[0], math.exp(best[1])


def min_clifford_closed_form(n: int) -> CliffordSpec:
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if n % 2 == 0:
        return CliffordSpec(n // 2, n // 2)
    return CliffordSpec((n - 1) // 2, (n + 1) // 2)


def min_ratio(n: int) -> float:
    """a_n = Area(T_min^n) / Area(S^n)."""
    spec, _ = min_clifford(n)
    return math.exp(log_clifford_area(spec) - log_unit_sphere_area(n))


# closed forms of a_2 .. a_7
A_CLOSED_FORMS = {
    2: math.pi / 2,
    3: 8 / (3 * math.sqrt(3)),
    4: 1.5,
    5: 48 * math.sqrt(15) / 125,
    6: 15 * math.pi / 32,
    7: 768 * math.sqrt(21) / 2401,
}


# ---------------------------------------------------------------------------
# auxiliary functions


def _xlogx(x: float) -> float:
    return 0.0 if x == 0 else x * math.log(x)


def _log_h(x):
    return 0.5 * ((x + 3) * math.log(x + 1) + (x - 2) * math.log(x)
                  - (x + 2) * math.log(x + 2) - _xlogx(x - 1))


def _log_m(x):
    return 0.5 * ((2 * x - 2) * math.log(x) + 4 * math.log(x + 1) + (x + 3) * math.log(x + 3)
                  - _xlogx(x - 1) - (2 * x + 6) * math.log(x + 2))


def _log_p(x):
    return (x + 2) * math.log(x + 2) - x * math.log(x) - 2 * math.log(x + 1)


def _log_q(x):
    return 0.5 * (_xlogx(x - 2) + (x + 1) * math.log(x + 1)
                  - (x - 3) * math.log(x - 1) - (x + 2) * math.log(x))


def _log_u(x):
    return math.log(16.0) + 0.5 * (
        (x + 2) * math.log(x + 2) + (x + 3) * math.log(x + 3) + (2 * x - 1) * math.log(2 * x + 1)
        - x * math.log(x) - (x - 3) * math.log(x + 1) - 2 * math.log(2 * x + 3)
        - (2 * x + 5) * math.log(2 * x + 5))


def _log_v(x):
    return -math.log(16.0) + 0.5 * (
        x * math.log(x) + (x + 1) * math.log(x + 1) + 2 * math.log(2 * x + 3)
        + (2 * x + 7) * math.log(2 * x + 5) - (x + 6) * math.log(x + 2)
        - (x + 3) * math.log(x + 3) - (2 * x + 1) * math.log(2 * x + 1))


# name -> (log-evaluator, lower end of domain)
LEMMA_FUNCTIONS = {
    "h": (_log_h, 2.0),
    "m": (_log_m, 2.0),
    "p": (_log_p, 1.0),
    "q": (_log_q, 3.0),
    "u": (_log_u, 1.0),
    "v": (_log_v, 1.0),
}


def log_lemma_function(name: str, x: float) -> float:
    try:
        f, lo = LEMMA_FUNCTIONS[name]
    except KeyError:
        raise KeyError(f"unknown lemma function {name!r}; expected one of {sorted(LEMMA_FUNCTIONS)}") from None
    if not (x >= lo and math.isfinite(x)):
        raise DomainError(f"{name}(x) is defined on [{lo:g}, inf), got x={x}")
    return f(float(x))


def lemma_function(name: str, x: float) -> float:
    """Evaluate one of the auxiliary functions h, m, p, q, u, v."""
    return math.exp(log_lemma_function(name, x))


# ---------------------------------------------------------------------------
# sequences used by the monotonicity arguments


def c_ratio(k: int) -> float:
    """c_k = Area(T_{k-1,k+1}) / Area(T_{k,k}), k >= 2."""
    return math.exp(log_clifford_area(CliffordSpec(k - 1, k + 1)) - log_clifford_area(CliffordSpec(k, k)))


def euler_product(c: float, terms: int) -> float:
    """prod_{i=1}^{terms} (1 - c / i^2)."""
    i = np.arange(1, terms + 1, dtype=float)
    return float(np.exp(np.sum(np.log1p(-c / i**2))))


def euler_tail_factor(c: float, terms: int) -> float:
    """Lower bound of prod_{i>terms} (1 - c/i^2)."""
    return 1.0 - c * math.pi**2 / (6.0 * terms)


def odd_euler_product(terms: int) -> float:
    """prod_{i=1}^{terms} (1 - 1/(4 (2i+1)^2)); limit 2 sqrt(2) / 3."""
    i = np.arange(1, terms + 1, dtype=float)
    return float(np.exp(np.sum(np.log1p(-1.0 / (4.0 * (2 * i + 1) ** 2)))))


# ---------------------------------------------------------------------------
# batch verification


class _Checker:
    def __init__(self, report: AppendixReport):
        self.report = report

    def less(self, name, arg, a, b, what=""):
        """Record a failure unless a < b - MARGIN."""
        self.report.checks += 1
        if not a < b - MARGIN:
            self.report.failures.append((name, arg, f"{what}: expected {a!r} < {b!r}"))

    def close(self, name, arg, a, b, rtol, what=""):
        self.report.checks += 1
        if not abs(a - b) <= rtol * abs(b):
            self.report.failures.append((name, arg, f"{what}: {a!r} != {b!r} (rtol {rtol:g})"))

    def true(self, name, arg, cond, what=""):
        self.report.checks += 1
        if not cond:
            self.report.failures.append((name, arg, what))


def verify_appendices(n_max: int = 200, x_samples: int = 100, euler_terms: int = 10**6) -> AppendixReport:
    """Check every area inequality and monotonicity claim up to dimension n_max.

    Failures are collected in the report rather than raised.
    """
    if n_max < 7 or x_samples < 10:
        raise DomainError("verify_appendices needs n_max >= 7 and x_samples >= 10")
    report = AppendixReport(checked_range=(2, n_max))
    ck = _Checker(report)
    ns = range(2, n_max + 1)

    d = {n: density_ratio(n) for n in range(2, n_max + 4)}
    a = {n: min_ratio(n) for n in range(2, n_max + 2)}
    report.a_prefix = [a[n] for n in range(2, 8)]

    # d(n): bounds and strict decrease
    for n in ns:
        ck.less("ratio bound", n, SQRT_2PI_E, d[n], "sqrt(2pi/e) < d(n)")
        ck.true("ratio bound", n, d[n] <= math.pi / 2 + MARGIN, f"d(n) <= pi/2, got {d[n]!r}")
        ck.less("ratio decreasing", n, d[n + 1], d[n], "d(n+1) < d(n)")
        ck.close("dn ratio", n, d[n + 2] / d[n], lemma_function("h", n), 1e-10, "d(n+2)/d(n) = h(n)")
        ck.close("increasing ratio", n, d[n + 1] / d[n],
                 d[n + 3] / d[n + 2] * lemma_function("m", n), 1e-10, "d(n+1)/d(n) = m(n) d(n+3)/d(n+2)")
        ck.close("+2 ratio", n, math.exp(log_unit_sphere_area(n + 2) - log_unit_sphere_area(n)),
                 2 * math.pi / (n + 1), 1e-12, "Area(S^{n+2})/Area(S^n)")

    # a_n: closed forms, strict decrease, sqrt(2) lower bound, Proposition min
    for n, val in A_CLOSED_FORMS.items():
        ck.close("a closed form", n, a[n], val, 1e-12, f"a_{n}")
    for n in ns:
        ck.less("CH lower bound", n, SQRT2, a[n], "a_n > sqrt(2)")
        ck.less("decreasing", n, a[n + 1], a[n], "a_{n+1} < a_n")
        spec, _ = min_clifford(n)
        ck.true("min", n, spec == min_clifford_closed_form(n),
                f"brute force {spec} vs closed form {min_clifford_closed_form(n)}")
    b = {n: a[n + 1] / a[n] for n in range(2, n_max + 1)}
    for k in range(1, n_max):
        if 2 * k + 5 <= n_max:
            ck.close("a recursion even", k, a[2 * k + 4],
                     (2 * k + 1) * (2 * k + 3) / (4 * (k + 1) ** 2) * a[2 * k], 1e-10, "a_{2k+4}")
            ck.close("u", k, b[2 * k + 4] / b[2 * k], lemma_function("u", k), 1e-10, "b_{2k+4}/b_{2k} = u(k)")
            ck.less("u", k, b[2 * k], b[2 * k + 4], "b_{2k} < b_{2k+4}")
        if 2 * k + 6 <= n_max:
            ck.close("v", k, b[2 * k + 5] / b[2 * k + 1], lemma_function("v", k), 1e-10,
                     "b_{2k+5}/b_{2k+1} = v(k)")
            ck.less("v", k, b[2 * k + 1], b[2 * k + 5], "b_{2k+1} < b_{2k+5}")

    # Lemma +2 ineq: Area(T_{k,l}) < Area(T_{k-2,l+2}) for 3 <= k <= l+1
    for n in ns:
        for k in range(3, n):
            l = n - k
            if k <= l + 1:
                lo = log_clifford_area(CliffordSpec(k, l))
                hi = log_clifford_area(CliffordSpec(k - 2, l + 2))
                ck.less("+2 ineq", (k, l), lo, hi, f"log Area(T_{k},{l}) < log Area(T_{k - 2},{l + 2})")
                ck.close("+2 ineq", (k, l), math.exp(hi - lo),
                         math.exp(0.5 * (log_lemma_function("p", l) - log_lemma_function("p", k - 2))), 1e-10,
                         "area ratio = sqrt(p(l)/p(k-2))")

    # Lemma +1 ineq and the c_k sequence
    c = {k: c_ratio(k) for k in range(2, n_max // 2 + 1)}
    for k, ck_val in c.items():
        ck.less("+1 ineq", k, 1.0, ck_val, "c_k > 1")
        if k >= 3:
            ck.close("+1 ineq", k, c[k - 1] * ck_val, lemma_function("q", k), 1e-10, "c_{k-1} c_k = q(k)")
        if k + 2 in c:
            ck.less("+1 ineq", k, c[k + 2], ck_val, "c_{k+2} < c_k")

    # sampled lemma functions
    for name, (_, lo) in LEMMA_FUNCTIONS.items():
        xs = np.linspace(lo, float(n_max), x_samples)
        vals = [log_lemma_function(name, x) for x in xs]
        for x, v0, v1 in zip(xs[1:], vals[:-1], vals[1:]):
            if name in ("h", "m", "p"):
                ck.less(name, x, v0, v1, f"{name} increasing (log)")
            if name == "q":
                ck.less(name, x, v1, v0, "q decreasing (log)")
        for x, v in zip(xs, vals):
            if name in ("h", "m"):
                ck.less(name, x, v, 0.0, f"{name}(x) < 1 (log)")
            if name in ("q", "u", "v"):
                ck.less(name, x, 0.0, v, f"{name}(x) > 1 (log)")

    # Euler products with explicit tail bounds
    for cval, limit, label in ((0.25, 2 / math.pi, "1/(4i^2)"), (1 / 16, 2 * SQRT2 / math.pi, "1/(16i^2)")):
        prod = euler_product(cval, euler_terms)
        tail = euler_tail_factor(cval, euler_terms)
        # truncated product overshoots the limit by at most the tail factor
        ck.true("Euler product", euler_terms, limit - 1e-12 <= prod <= limit / tail + 1e-12,
                f"prod(1-{label}) = {prod!r}, limit {limit!r}, tail bound {tail!r}")
    odd = odd_euler_product(euler_terms)
    ck.true("Euler product", euler_terms,
            2 * SQRT2 / 3 - 1e-12 <= odd <= 2 * SQRT2 / 3 / euler_tail_factor(1 / 16, euler_terms) + 1e-12,
            f"odd product {odd!r}")

    remark = 2 * (1 - 1 / math.pi) * SQRT_2PI_E
    ck.less("remark", 0, 2.0, remark, "2(1-1/pi) sqrt(2pi/e) > 2")
    return report
