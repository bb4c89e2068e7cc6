"""Command-line entry point.

    cliffordflow areas --n-max 200
    cliffordflow critical --n 2 --epsilon 0.05 --N-s 1024
    cliffordflow spectrum --n 2 --epsilon 0.05
    cliffordflow flow --n 2 --epsilon 0.1 --init plus --t-end 5
    cliffordflow shoot --n 2 --epsilon 0.1
    cliffordflow sweep --n 2 3 --epsilon 0.2 0.1 0.05

Exit codes: 0 pass, 2 usage, 3 nonconvergence, 4 verification failure, 5 I/O.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .critical import (DEFAULT_N_S, RESOLUTION_RATIO, DegenerateStateError, NonconvergenceError,
                       continuation_sweep, expected_clifford_energy, expected_ground_energy,
                       solve_clifford_state, solve_ground_state)
from .flow import (DISSIPATION_RTOL, DichotomyError, InstabilityError, NormalizationError,
                   ShootingPreconditionError, Termination, evolve, ground_level, normalize_time,
                   shoot_connecting_orbit, shooting_setup)
from .geometry import (A_CLOSED_FORMS, DomainError, clifford_area, density_ratio, min_clifford,
                       min_clifford_closed_form, min_ratio, sphere_area, verify_appendices)
from .grids import ReducedGrid, min_intervals
from .spectrum import SpectrumError, TruncationError, morse_count

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("cliffordflow")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3
EXIT_VERIFY = 4
EXIT_IO = 5


class UsageError(Exception):
    pass


class VerificationError(Exception):
    pass


@dataclass
class RunConfig:
    n: list[int] = field(default_factory=lambda: [2])
    epsilon: list[float] = field(default_factory=lambda: [0.05])
    N_s: int | None = None
    N_theta: int = 128
    dt: float | None = None
    r: float | None = None
    bisect_tol: float = 1e-6
    t_horizon: float = 200.0
    out: str = "out"
    n_max: int = 200
    x_samples: int = 100
    which: str = "clifford"
    k_max: int = 6
    l_max: int = 6
    count: int = 5
    sample_every: float = 0.05
    t_end: float = 10.0
    init: str = "plus"
    amplitude: float = 0.01
    phase: list[float] = field(default_factory=lambda: [0.0])
    task: str = "critical"

    def validate(self):
        if any(n < 2 for n in self.n):
            raise UsageError("n must be at least 2")
        if not self.epsilon or any(not e > 0 for e in self.epsilon):
            raise UsageError("epsilon must be positive")
        for name in ("bisect_tol", "t_horizon", "sample_every", "t_end", "amplitude"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        for name in ("dt", "r"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise UsageError(f"{name} must be positive")
        if self.N_s is not None and self.N_s < 4:
            raise UsageError("N_s must be at least 4")
        if self.N_theta < 4:
            raise UsageError("N_theta must be at least 4")
        if self.which not in ("clifford", "ground", "both"):
            raise UsageError("which must be clifford, ground or both")

    @property
    def n1(self) -> int:
        if len(self.n) != 1:
            raise UsageError("this command takes a single --n")
        return self.n[0]

    @property
    def eps1(self) -> float:
        if len(self.epsilon) != 1:
            raise UsageError("this command takes a single --epsilon (use sweep for lists)")
        return self.epsilon[0]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def resolve_N_s(kind: str, eps: float, requested: int | None, default: int) -> int:
    """Requested N_s, raised (with a warning) until eps/h >= 8."""
    need = min_intervals(kind, eps, RESOLUTION_RATIO)
    N = default if requested is None else requested
    if N < need:
        if requested is not None:
            log.warning("N_s = %d gives eps/h < %g at eps = %g; raising N_s to %d",
                        requested, RESOLUTION_RATIO, eps, need)
        N = need
    return N


def threads() -> int:
    v = os.environ.get("CLIFFORDFLOW_THREADS", "1")
    try:
        k = int(v)
    except ValueError as exc:
        raise UsageError(f"CLIFFORDFLOW_THREADS must be an integer, got {v!r}") from exc
    return max(1, k)


def fan_out(fn, items):
    """Map over work items with a bounded pool; results in input order."""
    k = threads()
    if k == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))


# -- subcommands --------------------------------------------------------------


def cmd_areas(cfg: RunConfig, out: Path, meta: dict) -> int:
    if cfg.n_max < 7:
        raise UsageError("--n-max must be at least 7 (the closed forms run up to a_7)")
    rows = []
    for n in range(2, cfg.n_max + 1):
        spec, area = min_clifford(n)
        rows.append([n, density_ratio(n), min_ratio(n), spec.p, spec.q, area, sphere_area(n)])
    fio.write_csv(out / "areas.csv", ["n", "d", "a", "p_min", "q_min", "area_min", "area_sphere"], rows, meta)
    report = verify_appendices(cfg.n_max, cfg.x_samples)
    fio.write_json(out / "appendix_report.json", report.to_dict(), meta)
    print(f"appendix checks: {report.checks}, failures: {len(report.failures)}")
    for name, arg, detail in report.failures[:20]:
        print(f"  FAIL {name}({arg}): {detail}")
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_tmin(cfg: RunConfig, out: Path, meta: dict) -> int:
    if cfg.n_max < 2:
        raise UsageError("--n-max must be at least 2")
    rows, bad = [], []
    for n in range(2, cfg.n_max + 1):
        spec, area = min_clifford(n)
        closed = min_clifford_closed_form(n)
        a = min_ratio(n)
        known = A_CLOSED_FORMS.get(n)
        ok = (spec.p, spec.q) == (closed.p, closed.q) and (known is None or abs(a - known) < 1e-12)
        if not ok:
            bad.append(n)
        rows.append([n, spec.p, spec.q, area, a, "" if known is None else known, int(ok)])
    fio.write_csv(out / "tmin.csv", ["n", "p", "q", "area", "a", "a_closed_form", "ok"], rows, meta)
    fio.write_json(out / "tmin.json", {"n_max": cfg.n_max, "mismatches": bad, "passed": not bad}, meta)
    return EXIT_OK if not bad else EXIT_VERIFY


def _solve(which: str, n: int, eps: float, N_s: int | None):
    if which == "clifford":
        N = resolve_N_s("latitude_s", eps, N_s, DEFAULT_N_S)
        return solve_clifford_state(n, eps, grid=ReducedGrid(n, "latitude_s", N))
    N = resolve_N_s("latitude_alpha", eps, N_s, 2 * DEFAULT_N_S)
    return solve_ground_state(n, eps, grid=ReducedGrid(n, "latitude_alpha", N))


def _check_state(st, which: str) -> list[str]:
    errs = []
    if not st.residual < 1e-10:
        errs.append(f"residual {st.residual:.3e} >= 1e-10")
    if len(st.nodal_points) != 1:
        errs.append(f"{len(st.nodal_points)} nodal points, expected 1")
    elif which == "clifford" and st.eps <= 0.1:
        dev = abs(math.tan(st.nodal_points[0]) ** 2 - (st.n - 1))
        if not dev < 0.05:
            errs.append(f"|tan^2 s0 - (n-1)| = {dev:.3g} >= 0.05")
    elif which == "ground" and not abs(st.nodal_points[0]) < 0.02:
        errs.append(f"|alpha0| = {abs(st.nodal_points[0]):.3g} >= 0.02")
    return errs


def cmd_critical(cfg: RunConfig, out: Path, meta: dict) -> int:
    n, eps = cfg.n1, cfg.eps1
    kinds = ["clifford", "ground"] if cfg.which == "both" else [cfg.which]
    errs = []
    for which in kinds:
        st = _solve(which, n, eps, cfg.N_s)
        target = expected_clifford_energy(n) if which == "clifford" else expected_ground_energy(n)
        summary = {**st.summary(), "target_energy": target, "energy_ratio": st.energy / target}
        fio.write_field(out / f"{which}_state.csv", st.field, meta)
        fio.write_json(out / f"{which}_state.json", summary, meta)
        e = _check_state(st, which)
        errs += [f"{which}: {x}" for x in e]
        print(f"{which}: energy {st.energy:.10g} (ratio to 2 sigma area {st.energy / target:.6f}), "
              f"nodal points {st.nodal_points}, residual {st.residual:.2e}")
    for e in errs:
        print("FAIL", e)
    return EXIT_OK if not errs else EXIT_VERIFY


def cmd_spectrum(cfg: RunConfig, out: Path, meta: dict) -> int:
    n, eps = cfg.n1, cfg.eps1
    which = "clifford" if cfg.which == "both" else cfg.which
    N = cfg.N_s if cfg.N_s is not None else (1024 if which == "clifford" else 2048)
    st = _solve(which, n, eps, N)
    ms = morse_count(st, cfg.k_max, cfg.l_max, cfg.count)
    fio.write_json(out / "spectrum.json", {**ms.to_dict(), "state": which}, meta)
    fio.write_text(out / "spectrum.csv", ms.to_csv(), meta)
    print(f"morse index {ms.morse_index}, nullity {ms.nullity}, delta {ms.delta:.3e}, gap ratio {ms.gap_ratio:.1f}")
    errs = []
    if not ms.monotone():
        errs.append("eigenvalues not monotone in k and l")
    if which == "clifford" and eps <= 0.05:
        if (ms.morse_index, ms.nullity) != (n + 3, 2 * n):
            errs.append(f"(index, nullity) = ({ms.morse_index}, {ms.nullity}), expected ({n + 3}, {2 * n})")
        if not ms.gap_ratio >= 10:
            errs.append(f"gap ratio {ms.gap_ratio:.2f} < 10")
    if which == "ground" and ms.morse_index != 1:
        errs.append(f"ground-state index {ms.morse_index}, expected 1")
    for e in errs:
        print("FAIL", e)
    return EXIT_OK if not errs else EXIT_VERIFY


def _trace_checks(tr) -> list[str]:
    errs = []
    if not tr.energy_monotone():
        errs.append("energy not monotone")
    d = tr.dissipation_defects()
    if len(d) and not np.nanmax(d) < DISSIPATION_RTOL:
        errs.append(f"dissipation defect {np.nanmax(d):.2e} >= {DISSIPATION_RTOL:g}")
    if tr.termination == Termination.DIVERGED:
        errs.append("diverged")
    return errs


def _write_trace(out: Path, name: str, tr, meta: dict, snapshots: bool = True):
    fio.write_text(out / f"{name}_trace.csv", tr.to_csv(), meta)
    fio.write_json(out / f"{name}_trace.json", tr.summary(), meta)
    if snapshots and tr.final is not None:
        for i, (t, vals) in enumerate(sorted(tr.snapshots.items())):
            fio.write_field(out / "snapshots" / f"{name}_{i:03d}.csv", tr.final.with_values(vals),
                            {**meta, "t": t})


def cmd_flow(cfg: RunConfig, out: Path, meta: dict) -> int:
    n, eps = cfg.n1, cfg.eps1
    N = resolve_N_s("latitude_s", eps, cfg.N_s, 256)
    setup = shooting_setup(n, eps, None, N, cfg.N_theta)
    if cfg.init in ("plus", "minus"):
        sgn = 1.0 if cfg.init == "plus" else -1.0
        v = setup.base.values + sgn * cfg.amplitude * setup.phi1.values / np.max(np.abs(setup.phi1.values))
        u0 = setup.base.with_values(v)
    elif cfg.init == "constant":
        u0 = setup.base.with_values(np.full(setup.base.grid.size, cfg.amplitude))
    elif cfg.init == "path":
        u0 = setup.initial(float(np.clip(cfg.amplitude, -1.0, 1.0)))
    else:
        raise UsageError(f"unknown --init {cfg.init!r}")
    tr = evolve(u0, cfg.t_end, cfg.sample_every, cfg.dt)
    _write_trace(out, "flow", tr, meta)
    print(f"termination {tr.termination.value} at t = {tr.times[-1]:g}, energy {tr.energy[0]:.6g} -> {tr.energy[-1]:.6g}")
    errs = _trace_checks(tr)
    for e in errs:
        print("FAIL", e)
    return EXIT_OK if not errs else EXIT_VERIFY


def _shoot(cfg: RunConfig, n: int, eps: float, phase: float):
    N = resolve_N_s("latitude_s", eps, cfg.N_s, 256)
    return shoot_connecting_orbit(n, eps, cfg.r, cfg.bisect_tol, cfg.t_horizon, N, cfg.N_theta, phase,
                                  cfg.dt, cfg.sample_every)


def _shoot_checks(res) -> list[str]:
    errs = []
    for tr in (res.minus_trace, res.plus_trace, res.critical_trace):
        errs += _trace_checks(tr)
    lev = ground_level(res.n)
    if not abs(res.plateau_energy - lev) <= 0.05 * lev:
        errs.append(f"plateau energy {res.plateau_energy:.6g} not within 5% of {lev:.6g}")
    errs += res.dichotomy_violations
    return errs


def _write_shoot(out: Path, res, meta: dict, tag: str = ""):
    fio.write_json(out / f"shoot{tag}.json", res.summary(), meta)
    _write_trace(out, f"minus{tag}", res.minus_trace, meta, snapshots=False)
    _write_trace(out, f"plus{tag}", res.plus_trace, meta, snapshots=False)
    _write_trace(out, f"critical{tag}", res.critical_trace, meta)


def cmd_shoot(cfg: RunConfig, out: Path, meta: dict) -> int:
    n, eps = cfg.n1, cfg.eps1
    if len(cfg.phase) != 1:
        raise UsageError("shoot takes a single --phase (use sweep --task shoot for several)")
    res = _shoot(cfg, n, eps, cfg.phase[0])
    _write_shoot(out, res, meta)
    tn = "none" if res.normalization_time is None else f"{res.normalization_time:.6g}"
    print(f"t* = {res.t_star!r}, plateau energy = {res.plateau_energy:.6g} "
          f"(duration {res.plateau_duration:.3g}), normalization time = {tn}")
    errs = _shoot_checks(res)
    for e in errs:
        print("FAIL", e)
    return EXIT_OK if not errs else EXIT_VERIFY


def cmd_sweep(cfg: RunConfig, out: Path, meta: dict) -> int:
    errs = []
    if cfg.task == "critical":
        kinds = ["clifford", "ground"] if cfg.which == "both" else [cfg.which]
        items = [(n, w) for n in cfg.n for w in kinds]
        eps_min = min(cfg.epsilon)

        def work(item):
            n, w = item
            kind = "latitude_s" if w == "clifford" else "latitude_alpha"
            N = resolve_N_s(kind, eps_min, cfg.N_s, DEFAULT_N_S if w == "clifford" else 2 * DEFAULT_N_S)
            return continuation_sweep(n, cfg.epsilon, w, N_s=N)

        results = fan_out(work, items)
        rows = []
        for (n, w), states in zip(items, results):
            target = expected_clifford_energy(n) if w == "clifford" else expected_ground_energy(n)
            for st in states:
                s0 = st.nodal_points[0] if st.nodal_points else float("nan")
                rows.append([n, w, st.eps, st.energy, target, st.energy / target, s0, st.residual])
                errs += [f"{w} n={n} eps={st.eps:g}: {x}" for x in _check_state(st, w)]
        fio.write_csv(out / "sweep.csv",
                      ["n", "state", "epsilon", "energy", "target", "ratio", "nodal_point", "residual"], rows, meta)
        for r in rows:
            print(f"n={r[0]} {r[1]:8s} eps={r[2]:<6g} energy={r[3]:.8g} ratio={r[5]:.6f}")
    elif cfg.task == "shoot":
        items = [(n, e, p) for n in cfg.n for e in cfg.epsilon for p in cfg.phase]
        results = fan_out(lambda it: _shoot(cfg, *it), items)
        rows = []
        for i, ((n, e, p), res) in enumerate(zip(items, results)):
            _write_shoot(out, res, meta, tag=f"_{i:02d}")
            rows.append([n, e, p, res.t_star, res.plateau_energy, res.plateau_duration,
                         "" if res.normalization_time is None else res.normalization_time])
            errs += [f"n={n} eps={e:g} phase={p:g}: {x}" for x in _shoot_checks(res)]
        fio.write_csv(out / "sweep_shoot.csv",
                      ["n", "epsilon", "phase", "t_star", "plateau_energy", "plateau_duration", "normalization_time"],
                      rows, meta)
    else:
        raise UsageError(f"unknown sweep task {cfg.task!r}")
    for e in errs:
        print("FAIL", e)
    return EXIT_OK if not errs else EXIT_VERIFY


COMMANDS = {
    "areas": cmd_areas,
    "tmin": cmd_tmin,
    "critical": cmd_critical,
    "spectrum": cmd_spectrum,
    "flow": cmd_flow,
    "shoot": cmd_shoot,
    "sweep": cmd_sweep,
}


# -- argument parsing ----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="TOML file with RunConfig keys; flags override it")
    common.add_argument("--out", help="output directory")
    common.add_argument("--n", type=int, nargs="+")
    common.add_argument("--epsilon", type=float, nargs="+")
    common.add_argument("--N-s", dest="N_s", type=int)
    common.add_argument("--N-theta", dest="N_theta", type=int)
    common.add_argument("--dt", type=float)
    common.add_argument("--r", type=float)
    common.add_argument("--bisect-tol", dest="bisect_tol", type=float)
    common.add_argument("--t-horizon", dest="t_horizon", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="cliffordflow", description="Symmetry-reduced Allen-Cahn flow on spheres.")
    p.add_argument("--version", action="version", version=f"cliffordflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("areas", parents=[common], help="area tables and appendix verification")
    a.add_argument("--n-max", dest="n_max", type=int)
    a.add_argument("--x-samples", dest="x_samples", type=int)
    t = sub.add_parser("tmin", parents=[common], help="least-area Clifford hypersurface per dimension")
    t.add_argument("--n-max", dest="n_max", type=int)
    c = sub.add_parser("critical", parents=[common], help="Clifford / ground critical states")
    c.add_argument("--which", choices=["clifford", "ground", "both"])
    s = sub.add_parser("spectrum", parents=[common], help="Morse index and nullity")
    s.add_argument("--which", choices=["clifford", "ground"])
    s.add_argument("--k-max", dest="k_max", type=int)
    s.add_argument("--l-max", dest="l_max", type=int)
    s.add_argument("--count", type=int)
    f = sub.add_parser("flow", parents=[common], help="evolve from a perturbed Clifford state")
    f.add_argument("--init", choices=["plus", "minus", "constant", "path"])
    f.add_argument("--amplitude", type=float,
                   help="sup-norm of the phi1 perturbation, the constant value, or the path parameter")
    f.add_argument("--t-end", dest="t_end", type=float)
    f.add_argument("--sample-every", dest="sample_every", type=float)
    h = sub.add_parser("shoot", parents=[common], help="bisect for the connecting orbit")
    h.add_argument("--phase", type=float, nargs="+")
    h.add_argument("--sample-every", dest="sample_every", type=float)
    w = sub.add_parser("sweep", parents=[common], help="epsilon continuation or shooting family")
    w.add_argument("--task", choices=["critical", "shoot"])
    w.add_argument("--which", choices=["clifford", "ground", "both"])
    w.add_argument("--phase", type=float, nargs="+")
    return p


_LIST_KEYS = {"n": int, "epsilon": float, "phase": float}


def load_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except OSError:
            raise
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"bad config file: {exc}") from exc
    names = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - names
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for k, v in vars(args).items():
        if k in names and v is not None:
            data[k] = v
    for k, typ in _LIST_KEYS.items():
        if k in data and not isinstance(data[k], list):
            data[k] = [data[k]]
        if k in data:
            data[k] = [typ(x) for x in data[k]]
    try:
        cfg = RunConfig(**data)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        cfg = load_config(args)
        out = Path(cfg.out)
        meta = fio.meta_block(args.command, cfg.to_dict())
        return COMMANDS[args.command](cfg, out, meta)
    except (ShootingPreconditionError, DichotomyError, NormalizationError, VerificationError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (NonconvergenceError, DegenerateStateError, TruncationError, SpectrumError, InstabilityError) as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (UsageError, DomainError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
