"""Command-line front end.

Subcommands::

    compute   QFI at one point: closed form, spectral value and breakdown
    fig1a     scalar F_phi against r for five input angles (CSV)
    fig1b     scalar F_phi(pi/3) - F_phi(pi/6) against r (CSV)
    fig2      Dirac F_phi on a (theta, r) grid, long format (CSV)
    verify    named numerical checks with tolerances
    estimate  Monte Carlo Cramer-Rao experiment

Exit codes: 0 success, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import __version__
from . import closed_forms as cf
from . import unruh
from .estimation import EstimationError, EstimationRun, simulate_crb
from .qfi import qfi_spectral
from .verify import run_checks

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
COMPUTE_TOL = 1e-8

FIG1A_THETAS = ("pi/20", "pi/10", "3pi/20", "pi/5", "pi/4")
FIG1_R = ("0", "3", 121)
FIG2_THETA = ("0", "pi/2", 41)
FIG2_R = ("0", "pi/4-1e-6", 41)

_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*(?:e[+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$", re.I)


class UsageError(Exception):
    pass


def parse_angle(text: str) -> float:
    """Radians, with exact multiples of pi such as ``pi/4``, ``3pi/20``, ``pi/4-1e-6``."""
    s = str(text).strip()
    try:
        return float(s)
    except ValueError:
        pass
    # a trailing "+x" or "-x" offset, e.g. "pi/4-1e-6"
    m = re.match(r"^(.*pi(?:\s*/\s*[\d.]+)?)\s*([+-]\s*[\d.]+(?:e[+-]?\d+)?)$", s, re.I)
    offset = 0.0
    if m:
        s, offset = m.group(1), float(m.group(2).replace(" ", ""))
    m = _ANGLE.match(s)
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}")
    coef = m.group(1)
    num = float(coef) if coef not in (None, "", "+", "-") else (-1.0 if coef == "-" else 1.0)
    den = float(m.group(2)) if m.group(2) else 1.0
    return num * math.pi / den + offset


def fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="file of key=value lines; command-line flags take precedence")


def _point(p: argparse.ArgumentParser, need_param: bool = True) -> None:
    p.add_argument("--field", choices=unruh.FIELDS)
    p.add_argument("--theta", type=parse_angle)
    p.add_argument("--phi", type=parse_angle, default=0.0)
    p.add_argument("--r", type=parse_angle)
    if need_param:
        p.add_argument("--param", choices=unruh.PARAMS)


def _grid(p: argparse.ArgumentParser, axis: str, default: tuple[str, str, int]) -> None:
    p.add_argument(f"--grid-{axis}-start", type=parse_angle, default=parse_angle(default[0]))
    p.add_argument(f"--grid-{axis}-stop", type=parse_angle, default=parse_angle(default[1]))
    p.add_argument(f"--grid-{axis}-count", type=int, default=default[2])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unruh-qfi", description="Quantum Fisher information under Unruh noise.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="QFI at one point by closed form and by brute force")
    _common(p)
    _point(p)
    p.add_argument("--n-max", type=int, default=None, help="scalar Fock cutoff (default: automatic)")

    p = sub.add_parser("fig1a", help="scalar F_phi against r (CSV)")
    _common(p)
    _grid(p, "r", FIG1_R)
    p.add_argument("--tail-tol", type=float, default=cf.SERIES_TAIL_TOL)
    p.add_argument("--out")

    p = sub.add_parser("fig1b", help="scalar F_phi(pi/3) - F_phi(pi/6) against r (CSV)")
    _common(p)
    _grid(p, "r", FIG1_R)
    p.add_argument("--tail-tol", type=float, default=cf.SERIES_TAIL_TOL)
    p.add_argument("--out")

    p = sub.add_parser("fig2", help="Dirac F_phi over (theta, r) (CSV)")
    _common(p)
    _grid(p, "theta", FIG2_THETA)
    _grid(p, "r", FIG2_R)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="run named numerical checks")
    _common(p)
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--tol-scale", type=float, default=1.0, help=argparse.SUPPRESS)

    p = sub.add_parser("estimate", help="Monte Carlo Cramer-Rao experiment")
    _common(p)
    _point(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=20140101)
    return parser


def read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv: Sequence[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    config = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]  # type: ignore[union-attr]
    known = {a.dest for a in subparser._actions}
    unknown = sorted(set(config) - known - {"config"})
    if unknown:
        raise UsageError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    # string defaults go through each action's type converter on re-parse
    subparser.set_defaults(**{k: v for k, v in config.items() if k != "config"})
    return parser.parse_args(argv)


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command}: missing {', '.join(missing)}")


def _linspace(start: float, stop: float, count: int, name: str) -> np.ndarray:
    if count < 2:
        raise UsageError(f"--grid-{name}-count must be at least 2, got {count}")
    if not stop > start:
        raise UsageError(f"--grid-{name}-stop must exceed --grid-{name}-start")
    return np.linspace(start, stop, count)


# ---------------------------------------------------------------------------
# CSV output


@dataclass
class Table:
    meta: list[tuple[str, str]]
    header: list[str]
    rows: list[list[float]]

    def render(self) -> str:
        buf = io.StringIO(newline="")
        for key, value in self.meta:
            buf.write(f"# {key}={value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(x) for x in row])
        return buf.getvalue()


def write_table(table: Table, out: str | None) -> None:
    text = table.render()
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror}") from exc
    print(f"wrote {len(table.rows)} rows to {out}")


def _grid_meta(name: str, start: float, stop: float, count: int) -> tuple[str, str]:
    return f"{name}_grid", f"{fmt(start)}:{fmt(stop)}:{count}"


# ---------------------------------------------------------------------------
# commands


def fig1a_table(r_grid: np.ndarray, tail_tol: float = cf.SERIES_TAIL_TOL) -> Table:
    thetas = [parse_angle(t) for t in FIG1A_THETAS]
    rows = [[float(r)] + [cf.scalar_f_phi_series(t, float(r), tail_tol) for t in thetas] for r in r_grid]
    meta = [
        ("command", "fig1a"),
        ("field", "scalar"),
        ("quantity", "F_phi"),
        ("thetas", ";".join(FIG1A_THETAS)),
        _grid_meta("r", r_grid[0], r_grid[-1], r_grid.size),
        ("tail_tol", fmt(tail_tol)),
    ]
    return Table(meta, ["r"] + [f"F_phi(theta={t})" for t in FIG1A_THETAS], rows)


def fig1b_table(r_grid: np.ndarray, tail_tol: float = cf.SERIES_TAIL_TOL) -> Table:
    rows = [[float(r), cf.delta_f_phi_scalar(float(r), tail_tol)] for r in r_grid]
    meta = [
        ("command", "fig1b"),
        ("field", "scalar"),
        ("quantity", "F_phi(theta=pi/3)-F_phi(theta=pi/6)"),
        _grid_meta("r", r_grid[0], r_grid[-1], r_grid.size),
        ("tail_tol", fmt(tail_tol)),
    ]
    return Table(meta, ["r", "delta_F_phi"], rows)


def fig2_table(theta_grid: np.ndarray, r_grid: np.ndarray) -> Table:
    rows = [[float(t), float(r), cf.dirac_f_phi(float(t), float(r))] for t in theta_grid for r in r_grid]
    meta = [
        ("command", "fig2"),
        ("field", "dirac"),
        ("quantity", "F_phi"),
        _grid_meta("theta", theta_grid[0], theta_grid[-1], theta_grid.size),
        _grid_meta("r", r_grid[0], r_grid[-1], r_grid.size),
    ]
    return Table(meta, ["theta", "r", "F_phi"], rows)


def _breakdown(field: str, theta: float, phi: float, r: float, param: str, n_max: int | None):
    if field == unruh.DIRAC:
        if 0.0 < theta < math.pi / 2:
            return unruh.dirac_eigensystem(theta, phi, r).breakdown(param)
        return None
    return unruh.scalar_channel(theta, phi, r, n_max=n_max).breakdown(param)


def cmd_compute(args: argparse.Namespace) -> int:
    _require(args, "field", "theta", "r", "param")
    unruh.check_theta(args.theta)
    unruh.check_phi(args.phi)
    unruh.check_r(args.field, args.r)
    rho, drho = unruh.channel_pair(args.field, args.theta, args.phi, args.r, args.param, args.n_max)
    spectral = qfi_spectral(rho, drho)
    closed = cf.closed_form(args.field, args.theta, args.r, args.param)
    diff = abs(closed - spectral)
    bd = _breakdown(args.field, args.theta, args.phi, args.r, args.param, args.n_max)
    print(f"field       = {args.field}")
    print(f"theta       = {fmt(args.theta)}")
    print(f"phi         = {fmt(args.phi)}")
    print(f"r           = {fmt(args.r)}")
    print(f"param       = {args.param}")
    print(f"closed_form = {fmt(closed)}")
    print(f"spectral    = {fmt(spectral)}")
    print(f"abs_diff    = {fmt(diff)}")
    if bd is None:
        print("breakdown   = n/a (eigensystem degenerate at this theta)")
    else:
        print(f"breakdown   = total {fmt(bd.total)}  classical {fmt(bd.classical)}  "
              f"quantum_avg {fmt(bd.quantum_avg)}  mixing {fmt(bd.mixing)}")
    ok = diff <= COMPUTE_TOL
    print(f"status      = {'PASS' if ok else 'FAIL'} (tol {COMPUTE_TOL:g})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fig1a(args: argparse.Namespace) -> int:
    grid = _linspace(args.grid_r_start, args.grid_r_stop, args.grid_r_count, "r")
    if grid[0] < 0:
        raise UsageError("r grid must be nonnegative")
    write_table(fig1a_table(grid, args.tail_tol), args.out)
    return EXIT_OK


def cmd_fig1b(args: argparse.Namespace) -> int:
    grid = _linspace(args.grid_r_start, args.grid_r_stop, args.grid_r_count, "r")
    if grid[0] < 0:
        raise UsageError("r grid must be nonnegative")
    write_table(fig1b_table(grid, args.tail_tol), args.out)
    return EXIT_OK


def cmd_fig2(args: argparse.Namespace) -> int:
    thetas = _linspace(args.grid_theta_start, args.grid_theta_stop, args.grid_theta_count, "theta")
    radii = _linspace(args.grid_r_start, args.grid_r_stop, args.grid_r_count, "r")
    if thetas[0] < 0 or thetas[-1] > math.pi / 2:
        raise UsageError("theta grid must lie in [0, pi/2]")
    if radii[0] < 0 or radii[-1] >= unruh.DIRAC_R_MAX:
        raise UsageError("Dirac r grid must lie in [0, pi/4)")
    write_table(fig2_table(thetas, radii), args.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if not args.tol_scale > 0:
        raise UsageError("--tol-scale must be positive")
    results = run_checks(args.level, args.tol_scale)
    for res in results:
        print(res.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed (level {args.level})")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_estimate(args: argparse.Namespace) -> int:
    _require(args, "field", "theta", "r", "param")
    run = EstimationRun(args.field, args.theta, args.phi, args.r, args.param,
                        samples=args.samples, trials=args.trials, seed=args.seed)
    try:
        rep = simulate_crb(run)
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"field       = {run.field}")
    print(f"target      = {run.target}")
    print(f"true_value  = {fmt(rep.true_value)}")
    print(f"qfi         = {fmt(rep.qfi)}")
    print(f"mean        = {fmt(rep.mean)}")
    print(f"variance    = {fmt(rep.variance)}")
    print(f"mse         = {fmt(rep.mse)}")
    print(f"samples     = {rep.samples}")
    print(f"trials      = {rep.trials}")
    print(f"crb_ratio   = {fmt(rep.crb_ratio)}")
    print(f"seed        = {rep.seed}")
    return EXIT_OK


COMMANDS = {
    "compute": cmd_compute,
    "fig1a": cmd_fig1a,
    "fig1b": cmd_fig1b,
    "fig2": cmd_fig2,
    "verify": cmd_verify,
    "estimate": cmd_estimate,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit with 2 already
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"unruh-qfi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"unruh-qfi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"unruh-qfi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
