"""Command-line front end.

Exit codes: 0 on success, 2 for configuration or precondition errors, 3 when
a solver fails (a partial report with a ``failures`` array is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .characteristic import CHUA4D_C1, CHUA4D_C2, fit_cubic
from .circuits import CHUA4D_CUBIC, circuit_info, parse_descriptor
from .classify import classify_folded_singularity, normal_form_coefficients
from .errors import (ConvergenceError, DomainError, NoSignChange, PreconditionError,
                     StepSizeUnderflow)
from .folded import find_pseudo_singular_points, genericity_check
from .simulate import (Trajectory, canard_initial_state, detect_canard,
                       emit_manifold_and_orbit, format_float, integrate)
from .stability import (HOPF_TOL, canard_window, characteristic_polynomial,
                        find_fixed_points, routh_hurwitz, saddle_region, sweep)

SCHEMA = 1
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
SOLVER_ERRORS = (ConvergenceError, NoSignChange, StepSizeUnderflow)


class ConfigError(Exception):
    pass


def _clean(obj):
    """Make a report JSON-safe: NaN/inf become null, arrays become lists."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, ensure_ascii=False) + "\n"


def _emit(text: str, args, filename: str) -> None:
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text, encoding="utf-8")


def _load(args):
    if not args.config:
        raise ConfigError("--config is required for this command")
    try:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in config: {exc}") from exc
    desc = parse_descriptor(data)
    system = desc.system
    info = circuit_info(system)
    duck = getattr(args, "duck", None)
    if duck is not None:
        if not info or not info.duck:
            raise ConfigError(f"circuit {system.circuit} has no duck parameter")
        system = system.with_params(**{info.duck: duck})
    return desc, system, info


def _require_smooth(info):
    if not info.smooth:
        raise ConfigError(f"{info.name} is piecewise linear; the folded analysis "
                          "needs a smooth characteristic")


def _header(command: str, args, desc, system) -> dict:
    return {"schema": SCHEMA, "command": command, "version": __version__,
            "seed": args.seed,
            "system": {"circuit": system.circuit, "params": dict(system.params),
                       "epsilon": system.epsilon},
            "cubic_fit": desc.fit.as_dict() if desc and desc.fit else None}


def cmd_fit(args) -> int:
    fit = fit_cubic(args.a, args.b, args.d)
    report = {"schema": SCHEMA, "command": "fit", **fit.as_dict()}
    _emit(dumps(report), args, "fit.json")
    return EXIT_OK


def _free(args, system, info):
    if system.k == 2:
        return None, 0.0
    index = args.free_index if args.free_index is not None else info.free_index
    return index, args.free_value


def cmd_analyze(args) -> int:
    desc, system, info = _load(args)
    _require_smooth(info)
    report = _header("analyze", args, desc, system)
    failures: list[str] = []
    notes: list[str] = []
    free_index, free_value = _free(args, system, info)
    duck = info.duck

    psps = find_pseudo_singular_points(system, free_index=free_index, free_value=free_value,
                                       tol=args.tol_newton, report=notes)
    if not psps:
        failures.append("no pseudo-singular point found")
    entries = []
    saddle_found = False
    for p in psps:
        sig = classify_folded_singularity(system, p)
        nf = normal_form_coefficients(system, p)
        saddle_found |= sig.is_saddle
        entries.append({
            **p.as_dict(),
            "sigma": sig.as_dict(),
            "genericity": genericity_check(system, p).as_dict(),
            "normal_form": nf.as_dict(),
            "identity_residuals": {"sigma2_minus_2a": sig.sigma2 - 2.0 * nf.a_coeff,
                                   "sigma1_plus_b": sig.sigma1 + nf.b_coeff},
        })
    report["pseudo_singularities"] = entries

    fps = []
    for fp in find_fixed_points(system, report=notes):
        rh = routh_hurwitz(characteristic_polynomial(system, fp))
        fps.append({"state": fp, "routh_hurwitz": rh.as_dict()})
    report["fixed_points"] = fps

    window = None
    try:
        window = canard_window(system, duck, scan_bound=args.scan_bound,
                               free_index=free_index, free_value=free_value,
                               hopf_tol=args.tol_hopf)
        report["canard_window"] = window.as_dict()
    except SOLVER_ERRORS as exc:
        failures.append(f"canard window: {exc}")
        report["canard_window"] = None

    value = system.params[duck]
    in_window = bool(window and window.contains(value))
    report["duck_parameter"] = {"name": duck, "value": value}
    report["verdict"] = {
        "canard_exists": bool(saddle_found and in_window),
        "folded_saddle": saddle_found,
        "in_window": in_window,
        "condition": f"sigma2 < 0 at a pseudo-singular point and {duck} inside the window",
    }
    report["notes"] = notes
    report["failures"] = failures
    _emit(dumps(report), args, "analysis.json")
    return EXIT_SOLVER if failures else EXIT_OK


def cmd_sweep(args) -> int:
    desc, system, info = _load(args)
    _require_smooth(info)
    name = args.parameter or info.duck
    if name not in system.params:
        raise ConfigError(f"unknown sweep parameter {name!r}")
    lo, hi = args.range
    if args.steps < 1:
        raise ConfigError("--steps must be at least 1")
    values = [lo] if lo == hi else np.linspace(lo, hi, args.steps).tolist()
    free_index, free_value = _free(args, system, info)
    rows = sweep(system, name, values, free_index, free_value)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    dets = [f"D{i + 1}" for i in range(system.k)]
    w.writerow(["parameter", *dets, "sigma2", "stable"])
    for r in rows:
        w.writerow([format_float(r.parameter), *(format_float(d) for d in r.determinants),
                    format_float(r.sigma2), "true" if r.stable else "false"])
    _emit(buf.getvalue(), args, "sweep.csv")
    failed = [f"{name}={r.parameter!r}: {m}" for r in rows for m in r.failures]
    for m in failed:
        print(m, file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_simulate(args) -> int:
    desc, system, info = _load(args)
    if not args.out:
        raise ConfigError("simulate needs --out for its data files")
    report = _header("simulate", args, desc, system)
    free_index, free_value = _free(args, system, info)
    psps = []
    if info.smooth:
        psps = find_pseudo_singular_points(system, free_index=free_index, free_value=free_value)
    if args.initial is not None:
        start = np.array(args.initial, dtype=float)
        if start.size != system.dim:
            raise ConfigError(f"--initial needs {system.dim} values")
    elif psps:
        chosen = [p for p in psps if p.sign_branch == args.branch] or psps
        start = canard_initial_state(system, chosen[0], args.offset)
    else:
        raise ConfigError("no pseudo-singular point to start from; give --initial")
    sample_dt = args.sample_dt or (1e-3 if system.k == 2 else 1e-2)

    failures = []
    if args.t_final > 0.0:
        try:
            traj = integrate(system, start, args.t_final, args.tol_rel, args.tol_abs, sample_dt)
        except StepSizeUnderflow as exc:
            failures.append(str(exc))
            traj = Trajectory.empty(system.dim)
    elif args.t_final == 0.0:
        traj = Trajectory.empty(system.dim)
    else:
        raise ConfigError("--t-final must be non-negative")

    bundle = emit_manifold_and_orbit(system, traj, psps=psps)
    paths = bundle.write(args.out)
    canard = detect_canard(traj, system, args.delta) if info.smooth and len(traj) else None
    report.update({
        "initial_state": start,
        "t_final": args.t_final,
        "sample_dt": sample_dt,
        "samples": len(traj),
        "diverged": traj.diverged,
        "step_stats": traj.step_stats.as_dict(),
        "canard": canard.as_dict() if canard else {"delta": args.delta, "repelling_time": 0.0,
                                                  "segments": []},
        "files": sorted(p.name for p in paths),
        "failures": failures,
    })
    text = dumps(report)
    Path(args.out, "canard.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_SOLVER if failures else EXIT_OK


def cmd_region(args) -> int:
    c1, c2 = args.c1, args.c2
    if (c1 is None or c2 is None) and args.config:
        _, system, _ = _load(args)
        if system.circuit != CHUA4D_CUBIC:
            raise ConfigError("region needs the chua4d_cubic circuit or explicit --c1/--c2")
        c1 = system.params["c1"] if c1 is None else c1
        c2 = system.params["c2"] if c2 is None else c2
    c1 = CHUA4D_C1 if c1 is None else c1
    c2 = CHUA4D_C2 if c2 is None else c2
    region = saddle_region(c1, c2)
    probes = [{"x2": x2, "alpha2": a2, "membership": region.membership(x2, a2)}
              for x2, a2 in (args.probe or [])]
    report = {"schema": SCHEMA, "command": "region", **region.as_dict(), "probes": probes}
    _emit(dumps(report), args, "region.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    def global_options(suppress: bool) -> argparse.ArgumentParser:
        # subcommand copies carry no defaults so they never mask values given earlier
        p = argparse.ArgumentParser(add_help=False)
        g = p.add_argument_group("global options")

        def opt(flag, default, **kw):
            g.add_argument(flag, default=argparse.SUPPRESS if suppress else default, **kw)
        opt("--config", None, help="JSON system descriptor")
        opt("--out", None, help="directory for output files")
        opt("--seed", 0, type=int, help="seed recorded in reports (u64)")
        opt("--tol-newton", 1e-12, type=float, help="pseudo-singular Newton tolerance")
        opt("--tol-hopf", HOPF_TOL, type=float, help="Hopf bisection tolerance")
        opt("--tol-rel", 1e-9, type=float, help="integrator relative tolerance")
        opt("--tol-abs", 1e-11, type=float, help="integrator absolute tolerance")
        return p

    common = global_options(suppress=True)
    parser = argparse.ArgumentParser(prog="canards", parents=[global_options(suppress=False)],
                                     description="Canard analysis of slow-fast memristor circuits")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    # subcommands repeat the global options so they may follow the subcommand name
    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    p = add("fit", "least-squares cubic fit of the PWL characteristic")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.set_defaults(func=cmd_fit)

    def pin(p):
        p.add_argument("--free-index", type=int, default=None)
        p.add_argument("--free-value", type=float, default=0.0)

    p = add("analyze", "full folded-singularity and stability report")
    p.add_argument("--duck", type=float, default=None, help="override the duck parameter")
    p.add_argument("--scan-bound", type=float, default=1.0)
    pin(p)
    p.set_defaults(func=cmd_analyze)

    p = add("sweep", "Routh-Hurwitz determinants along a parameter")
    p.add_argument("--parameter", default=None)
    p.add_argument("--range", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--steps", type=int, default=101)
    pin(p)
    p.set_defaults(func=cmd_sweep)

    p = add("simulate", "integrate, detect canards and write plot data")
    p.add_argument("--t-final", type=float, default=30.0)
    p.add_argument("--sample-dt", type=float, default=None)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--offset", type=float, default=1e-3)
    p.add_argument("--branch", choices=("plus", "minus"), default="plus")
    p.add_argument("--initial", type=float, nargs="+", default=None)
    p.add_argument("--duck", type=float, default=None)
    pin(p)
    p.set_defaults(func=cmd_simulate)

    p = add("region", "saddle region of the 4D pseudo-singular curve")
    p.add_argument("--c1", type=float, default=None)
    p.add_argument("--c2", type=float, default=None)
    p.add_argument("--probe", type=float, nargs=2, action="append", metavar=("X2", "ALPHA2"))
    p.set_defaults(func=cmd_region)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PreconditionError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        report = {"schema": SCHEMA, "command": args.command, "failures": [str(exc)]}
        sys.stdout.write(dumps(report))
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
