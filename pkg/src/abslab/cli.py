"""Command-line interface: ``abslab verify | symmetries | miura | simulate | report``.

Exit codes: 0 everything passed, 1 some check failed (or a simulation
residual exceeded its tolerance), 2 usage or parse error, 3 a runtime
degeneracy (sampling exhausted, or the simulation hit a singular stencil).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import __version__
from .battery import ORDER, VERIFY_SECTIONS, Report, describe_equation, run_battery, run_miura, run_symmetries
from .catalog import CATALOG, build_equation
from .errors import (
    AbslabError,
    ConfigError,
    MissingParameter,
    NotAffineLinear,
    ParseError,
    SimulationError,
    UnknownEquation,
)
from .field import parse_rational
from .parser import parse_equation, parse_polynomial, recognize
from .sampling import DEFAULT_SEED

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _rational(text):
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("equation", nargs="?", help="catalog name: " + ", ".join(CATALOG))
    p.add_argument("--eq", dest="eq_flag", metavar="NAME", help="catalog name (same as the positional argument)")
    p.add_argument("--user", metavar="FILE", help="read the equation from a text file")
    p.add_argument("--delta", type=_rational)
    p.add_argument("--g2", type=_rational)
    p.add_argument("--g3", type=_rational)
    p.add_argument("--samples", type=int, help="samples per check (default: per-check values)")
    p.add_argument("--seed", type=int, help=f"random seed (default: $ABSLAB_SEED or {DEFAULT_SEED})")
    p.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    p.add_argument("--stable-output", action="store_true", help="omit timestamps and timings from JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abslab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"abslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="integrability battery")
    _common(p)
    p.add_argument(
        "--only", metavar="SECTIONS", help="comma-separated subset of: " + ",".join(VERIFY_SECTIONS)
    )

    p = sub.add_parser("symmetries", help="three- and five-point symmetry checks and coefficients")
    _common(p)
    p.add_argument("--alpha", type=_rational, help="alpha for the printed coefficients")

    p = sub.add_parser("miura", help="Miura map checks and round trip")
    _common(p)

    p = sub.add_parser("report", help="every check plus symmetry and Miura data")
    _common(p)

    p = sub.add_parser("simulate", help="floating-point flow and Baecklund run")
    _common(p)
    p.add_argument("--csv", metavar="PATH", help="write the Baecklund row as eps,n,value (seed to PATH.seed.csv)")
    p.add_argument("--N", type=int, default=16, help="lattice sites (>= 5)")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--h", type=float, default=1e-3, help="RK4 step")
    p.add_argument("--tol", type=float, default=1e-6, help="residual tolerance")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--beta0", type=float, default=3.0)
    p.add_argument("--mu0", type=float, default=0.7, help="initial value of the Baecklund row at the anchor")
    p.add_argument("--amplitude", type=float, default=2.0, help="c in the seed c, c, -c, -c, ...")
    p.add_argument("--boundary", choices=("frozen", "linear"), default="frozen")
    return parser


def resolve_seed(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("ABSLAB_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"ABSLAB_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def resolve_equation(args):
    """(QuadEquation, source, recognized)."""
    names = [x for x in (args.equation, args.eq_flag) if x]
    if len(set(n.upper() for n in names)) > 1:
        raise UsageError("conflicting equation names")
    if args.user and names:
        raise UsageError("give either a catalog name or --user, not both")
    if args.user:
        text = Path(args.user).read_text()
        eq = parse_equation(text, delta=args.delta, g2=args.g2, g3=args.g3)
        if eq.name != "USER":
            # an exact catalog match runs as the catalog equation, report included
            print(f"abslab: {args.user} is catalog equation {eq.name}", file=sys.stderr)
            return eq, "catalog", None
        return eq, "user", recognize(parse_polynomial(text), args.delta)
    if not names:
        raise UsageError("an equation name or --user FILE is required")
    name = names[0].upper()
    if name not in CATALOG:
        raise UnknownEquation(name)
    if name == "Q4":
        if args.g2 is None and args.g3 is None:
            return build_equation(name, free_curve=True), "catalog", None
        return build_equation(name, g2=args.g2, g3=args.g3), "catalog", None
    return build_equation(name, delta=args.delta), "catalog", None


def _emit(report: Report, args, out):
    seed_line = f"seed: {report.seed}"
    print(seed_line, file=out)
    eqd = report.equation
    extra = f" (recognized as {eqd['recognized_as']['name']})" if "recognized_as" in eqd else ""
    print(f"equation: {eqd['name']}{extra}", file=out)
    for e in report.entries:
        label = e.section if e.report.name == e.section else f"{e.section}/{e.report.name}"
        line = f"  {e.report.verdict:<15} {label}"
        reason = e.report.details.get("reason") if e.report.details else None
        if reason:
            line += f"  ({reason})"
        print(line, file=out)
    if report.simulation:
        s = report.simulation
        if s["config"].get("steps") == 0:
            print("  initial state: " + " ".join(repr(x) for x in s["initial_state"]), file=out)
        for key in ("seed_max_residual", "baecklund_max_residual"):
            v = s.get(key)
            print(f"  {key}: {'n/a' if v is None else f'{v:.3e}'}", file=out)
        print(f"  tolerance: {s['tolerance']:.1e}  ok: {s['ok']}", file=out)


def _write_json(report: Report, args):
    if not args.json:
        return
    text = report.dumps(stable=args.stable_output)
    if args.json == "-":
        sys.stdout.write(text)
    else:
        Path(args.json).write_text(text)


def cmd_simulate(args, eq, seed, source, recognized) -> Report:
    from .sim import SimConfig, backlund_extend, max_residual, period_four_seed, simulate_seed

    cfg = SimConfig.from_steps(
        args.steps, h=args.h, N=args.N, tol=args.tol, alpha=args.alpha, beta0=args.beta0, boundary=args.boundary
    )
    report = Report("simulate", describe_equation(eq, source, recognized), seed)
    start = time.perf_counter()
    u0 = period_four_seed(cfg.N, args.amplitude)
    traj = simulate_seed(eq, u0, cfg)
    row = backlund_extend(eq, traj, cfg.beta0, args.mu0, cfg)
    enough = len(traj.times) >= 5
    seed_res = max_residual(traj) if enough else None
    row_res = max_residual(row) if enough else None
    ok = row_res is None or row_res < cfg.tol
    report.simulation = {
        "config": cfg.to_json(),
        "mu0": args.mu0,
        "seed_kind": f"period-4, amplitude {args.amplitude}",
        "seed_max_residual": seed_res,
        "baecklund_max_residual": row_res,
        "tolerance": cfg.tol,
        "ok": ok,
        "initial_state": [float(x) for x in traj.states[0]],
        "final_seed": [float(x) for x in traj.states[-1]],
        "final_row": [float(x) for x in row.states[-1]],
    }
    if not args.stable_output:
        report.simulation["elapsed_s"] = round(time.perf_counter() - start, 6)
    if args.csv:
        row.write_csv(args.csv)
        traj.write_csv(str(args.csv) + ".seed.csv")
    return report


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    human = sys.stderr if args.json == "-" else sys.stdout
    try:
        seed = resolve_seed(args.seed)
    except UsageError as exc:
        print(f"abslab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        eq, source, recognized = resolve_equation(args)
        if args.samples is not None and args.samples < 1:
            raise UsageError("--samples must be >= 1")
        if args.command == "verify":
            sections = VERIFY_SECTIONS
            if args.only:
                sections = tuple(s.strip() for s in args.only.split(",") if s.strip())
                bad = [s for s in sections if s not in ORDER]
                if bad:
                    raise UsageError(f"unknown sections: {', '.join(bad)}")
            report = run_battery(eq, sections, args.samples, seed, "verify", source, recognized)
        elif args.command == "symmetries":
            report = run_symmetries(eq, args.samples, seed, args.alpha, source, recognized)
        elif args.command == "miura":
            report = run_miura(eq, args.samples, seed, source, recognized)
        elif args.command == "report":
            report = run_battery(eq, ORDER, args.samples, seed, "report", source, recognized)
            sym = run_symmetries(eq, args.samples, seed, None, source, recognized)
            report.symmetry = sym.symmetry
            mi = run_miura(eq, args.samples, seed, source, recognized)
            report.miura = mi.miura
        else:
            report = cmd_simulate(args, eq, seed, source, recognized)
    except (UsageError, ParseError, NotAffineLinear, ConfigError, UnknownEquation, MissingParameter) as exc:
        print(f"seed: {seed}", file=human)
        print(f"abslab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"seed: {seed}", file=human)
        print(f"abslab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SimulationError as exc:
        print(f"seed: {seed}", file=human)
        print(f"abslab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except AbslabError as exc:
        print(f"seed: {seed}", file=human)
        print(f"abslab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _emit(report, args, human)
    _write_json(report, args)
    sim_ok = report.simulation.get("ok", True) if report.simulation else True
    return report.exit_code(sim_ok)


if __name__ == "__main__":
    sys.exit(main())
