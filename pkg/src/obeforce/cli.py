"""Command-line surface.

Four subcommands: ``force`` solves a single configuration and prints the
per-wave rates, force components and requested rate harmonics; ``scan``
walks the scan variable of a scenario file and emits one row per point;
``gao-table`` tabulates the closed-form rate-law coefficients; ``check``
runs the built-in verification suites.

Output is comma-delimited text with a '#'-prefixed metadata preamble,
numbers at 17 significant digits, and no timestamps, so identical inputs
give byte-identical files.  Exit codes: 0 success, 1 usage or parse
problem, 2 solver failure, 3 check-suite failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import sys
from importlib import metadata

import numpy as np

from .angular import HalfInt
from .checks import SUITES, run_suites
from .errors import ObeForceError, UnsupportedTransition
from .regimes import gao_params
from .scenario import evaluate_point, load_scenario, run_scan
from .state_layout import AtomicTransition

try:
    _VERSION = metadata.version("obeforce")
except metadata.PackageNotFoundError:
    _VERSION = "unknown"


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors on exit code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_table(out_path, preamble, header, rows):
    stream = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        for line in preamble:
            stream.write(f"# {line}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(c) for c in row])
    finally:
        if out_path:
            stream.close()


def _config_digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _vec(v):
    return ",".join(_fmt(c) for c in v)


def _cx(c):
    return f"{c.real:.17g}{c.imag:+.17g}j"


def _scenario_preamble(command, scenario, config_path):
    tr = scenario.transition
    lines = [
        f"obeforce {command} v{_VERSION}",
        f"config: {config_path} sha256={_config_digest(config_path)}",
        f"transition: j_g={tr.j_g} j_e={tr.j_e}"
        + (" two_level_override" if tr.two_level_override else ""),
        "units: rates gamma, detunings gamma, velocity gamma/k0, force hbar*k0*gamma",
    ]
    for j, w in enumerate(scenario.waves, start=1):
        lines.append(
            f"wave {j}: rabi={_cx(w.rabi)} detuning={_fmt(w.detuning)} "
            f"direction={_vec(w.k_dir)} k={_fmt(w.k_mag)} "
            f"pol={','.join(_cx(c) for c in w.pol)}")
    lines.append("kappa: " + (_vec(scenario.kappa) if scenario.kappa else "uniform"))
    if scenario.average_phase:
        lines.append(f"phase-average: {scenario.phase_points} points "
                     f"along {_vec(scenario.phase_axis)}")
    so = scenario.solver
    lines.append(f"solver: tol={_fmt(so.tol)} n_blocks_cap={so.n_blocks_cap} "
                 f"cond_threshold={_fmt(so.cond_threshold)}")
    return lines


def _with_tol(scenario, tol):
    if tol is None:
        return scenario
    from dataclasses import replace
    return replace(scenario, solver=replace(scenario.solver, tol=tol))


def cmd_force(args):
    scenario = _with_tol(load_scenario(args.config), args.tol)
    span = args.harmonics if args.harmonics is not None else scenario.harmonic_span
    preamble = _scenario_preamble("force", scenario, args.config)
    if scenario.scan is not None:
        preamble.append("scan: ignored (single-point run)")
    result = evaluate_point(scenario, harmonic_span=span, strict=True)

    header = ["wave", "rbar", "fx", "fy", "fz"]
    ns = range(-span, span + 1)
    for n in ns:
        header += [f"R{n}_re", f"R{n}_im"]
    rows = []
    for j in range(len(scenario.waves)):
        row = [j + 1, result.rbar[j], *result.force_per_wave[j]]
        for n in ns:
            r = result.rate_harmonics[(j, n)]
            row += [r.real, r.imag]
        rows.append(row)
    total = ["total", result.rbar.sum(), *result.force]
    for n in ns:
        r = sum(result.rate_harmonics[(j, n)] for j in range(len(scenario.waves)))
        total += [r.real, r.imag]
    rows.append(total)
    preamble.append(f"harmonic blocks used: {result.n_blocks}")
    _write_table(args.out, preamble, header, rows)
    return 0


def cmd_scan(args):
    scenario = _with_tol(load_scenario(args.config), args.tol)
    if scenario.scan is None:
        raise ValueError("scan subcommand needs a [scan] section in the config")
    preamble = _scenario_preamble("scan", scenario, args.config)
    sc = scenario.scan
    preamble.append(f"scan: {sc.variable}, {len(sc.values)} points, "
                    f"axis={_vec(sc.axis)}")
    results = run_scan(scenario, threads=args.threads)

    n_waves = len(scenario.waves)
    header = ([sc.variable, "status", "fx", "fy", "fz"]
              + [f"rbar_{j + 1}" for j in range(n_waves)]
              + ["n_blocks", "error"])
    rows = []
    failures = 0
    for r in results:
        value = float(r.value)
        if r.ok:
            rows.append([value, "ok", *r.force, *r.rbar, r.n_blocks, ""])
        else:
            failures += 1
            nan = float("nan")
            rows.append([value, "failed", nan, nan, nan,
                         *([nan] * n_waves), 0, r.error])
    preamble.append(f"failed points: {failures} of {len(results)}")
    _write_table(args.out, preamble, header, rows)
    return 0


def cmd_gao_table(args):
    max_jg = HalfInt(args.max_jg)
    preamble = [
        f"obeforce gao-table v{_VERSION}",
        "rate law: rbar = (1/2) s a / (b + s) per wave, "
        "s = |Omega|^2/2 / (1/4 + delta^2)",
        "a = b = 0 marks a dark configuration (zero rate at any intensity)",
    ]
    header = ["j_g", "delta_j", "q", "a", "b"]
    rows = []
    for j_g in (HalfInt.from_twice(t) for t in range(1, max_jg.twice + 1)):
        for dj in (0, 1):
            j_e = j_g + dj
            tr = AtomicTransition(j_g, j_e)
            for q in (1, 0, -1):
                try:
                    p = gao_params(tr, q)
                except UnsupportedTransition:
                    continue
                rows.append([str(j_g), dj, q, p.a, p.b])
    _write_table(args.out, preamble, header, rows)
    return 0


def cmd_check(args):
    names = args.suites or sorted(SUITES)
    reports = run_suites(names, seed=args.seed)
    failed = 0
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status} {rep.name}: max residual {rep.residual:.3e} "
              f"(threshold {rep.threshold:.0e}; {rep.detail})")
        failed += not rep.passed
    if failed:
        print(f"{failed} of {len(reports)} suites failed", file=sys.stderr)
        return 3
    return 0


def build_parser():
    parser = _Parser(prog="obeforce",
                     description="Radiation pressure on multilevel atoms "
                                 "in polychromatic light")
    parser.add_argument("--version", action="version", version=f"obeforce {_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("force", help="solve one configuration")
    p.add_argument("--config", required=True, help="scenario INI file")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--harmonics", type=int, help="emit R_j^(n) for |n| <= N")
    p.add_argument("--tol", type=float, help="override solver tolerance")
    p.set_defaults(func=cmd_force)

    p = sub.add_parser("scan", help="walk the scan variable of a scenario")
    p.add_argument("--config", required=True, help="scenario INI file")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--threads", type=int, default=1, help="parallel scan points")
    p.add_argument("--tol", type=float, help="override solver tolerance")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("gao-table", help="closed-form rate-law coefficients")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--max-jg", default="6", help="largest ground momentum (default 6)")
    p.set_defaults(func=cmd_gao_table)

    p = sub.add_parser("check", help="run built-in verification suites")
    p.add_argument("suites", nargs="*", metavar="suite",
                   help=f"suites to run (default all): {', '.join(sorted(SUITES))}")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ObeForceError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
