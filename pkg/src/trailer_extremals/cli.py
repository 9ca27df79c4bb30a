"""Command-line interface: primitive | simulate | check | plot | compose.

Exit codes: 0 success/pass, 1 check failure, 2 usage or input error,
3 truncated run (too many switches).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .checker import check_pmp
from .composer import ScriptError, SimOptions, run_script, simulate_extremal
from .config import SEEDS
from .model import AdjointState, Configuration, ExtremalConstants, Line, ModelError, Segment, SegmentKind, Trajectory
from .regular import regular_samples
from .singular import (
    MergeBranch,
    SingularArcError,
    SingularArcState,
    merging_curve,
    phi_v_singular_segment,
    propagate_phi_omega_singular,
    singular_constants,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_TRUNCATED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _vec(text: str, n: int, name: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"{name}: expected {n} comma-separated numbers, got {text!r}")
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{name}: expected {n} finite comma-separated numbers, got {text!r}")
    return vals


def _options(a) -> SimOptions:
    if not a.h > 0:
        raise UsageError("--h must be positive")
    return SimOptions(h=a.h, eps_switch=a.eps_switch, eps_merge=a.eps_merge, max_switches=a.max_switches)


def _emit(traj: Trajectory, a) -> None:
    if a.out:
        io.write_json(traj, a.out)
    else:
        sys.stdout.write(io.dumps(traj))
    if a.csv:
        io.write_csv(traj, a.csv)


def _summary(traj: Trajectory, stream) -> None:
    print(f"{'#':>3} {'kind':<17} {'t_start':>12} {'t_end':>12}  exit", file=stream)
    for i, s in enumerate(traj.segments):
        print(f"{i:>3} {s.kind.value:<17} {s.t_start:>12.9f} {s.t_end:>12.9f}  {s.exit_reason}", file=stream)
    if traj.segments:
        print("switch times: " + ", ".join(f"{t:.12g}" for t in traj.switch_times()), file=stream)
    if traj.truncated:
        print("TRUNCATED: switch limit reached (possible chattering)", file=stream)


def cmd_primitive(a) -> int:
    q0 = Configuration(a.x0, a.y0, a.theta0, a.beta0)
    h = a.h
    if a.kind == "regular":
        if a.v not in (-1, 1) or a.omega not in (-1, 1):
            raise UsageError("regular primitives need --v and --omega in {-1, +1}")
        if a.dt is None or a.dt < 0:
            raise UsageError("regular primitives need --dt >= 0")
        if a.lambda0:
            lam = AdjointState(*_vec(a.lambda0, 4, "--lambda0"))
        else:
            lam = AdjointState(0.0, 0.0, float(a.omega), a.lbeta0)
        c = ExtremalConstants.from_initial(q0, lam)
        seg = Segment(SegmentKind.regular(a.v, a.omega), regular_samples(q0, lam, a.v, a.omega, a.dt, h), constants=c)
        traj = Trajectory(c, [seg])
    elif a.kind == "merge":
        if a.branch not in (-1, 1):
            raise UsageError("--branch must be +1 or -1")
        if a.beta_start is None:
            raise UsageError("merge needs --beta-start")
        # the merging manifold is consistent only when the speed sign equals the branch
        seg = merging_curve(Line(1.0, 0.0, 0.0), a.branch, MergeBranch(a.branch), a.beta_start,
                            a.eps_merge, h, reverse=a.reverse)
        traj = Trajectory(seg.constants, [seg])
    elif a.kind == "phiv":
        if a.omega not in (-1, 1):
            raise UsageError("phi_v-singular primitives need --omega in {-1, +1}")
        if abs(a.v) > 1 or a.dt is None or a.dt <= 0:
            raise UsageError("phiv needs |--v| <= 1 and --dt > 0")
        seg = phi_v_singular_segment(q0, a.omega, lambda s, v=a.v: v, a.dt, h)
        traj = Trajectory(seg.constants, [seg])
    else:
        if a.dt is None or a.dt <= 0:
            raise UsageError("singular needs --dt > 0")
        c = singular_constants(q0, a.lambda_theta, a.phi_v)
        seg = propagate_phi_omega_singular(SingularArcState(q0, a.lambda_theta, a.phi_v), c, a.dt, h, a.eps_merge)
        traj = Trajectory(c, [seg])
    _emit(traj, a)
    _summary(traj, sys.stderr)
    return EXIT_OK


def _simulate_one(q0, lam0, T, opts):
    if lam0.is_trivial():
        raise UsageError("--lambda0 must be nonzero")
    if not T > 0:
        raise UsageError("--T must be positive")
    return simulate_extremal(q0, lam0, T, opts)


def cmd_simulate(a) -> int:
    opts = _options(a)
    if a.batch:
        return _simulate_batch(a, opts)
    rng = np.random.default_rng(a.seed)
    q0 = Configuration(*_vec(a.q0, 4, "--q0")) if a.q0 else Configuration(0.0, 0.0, 0.0, 0.0)
    lam0 = AdjointState(*_vec(a.lambda0, 4, "--lambda0")) if a.lambda0 else AdjointState(*rng.normal(size=4))
    traj = _simulate_one(q0, lam0, a.T, opts)
    _emit(traj, a)
    out = sys.stderr if not a.out else sys.stdout
    _summary(traj, out)
    return EXIT_TRUNCATED if traj.truncated else EXIT_OK


def _simulate_batch(a, opts) -> int:
    """Each line of the batch file: x,y,theta,beta,lx,ly,ltheta,lbeta[,T]."""
    if not a.out:
        raise UsageError("--batch needs --out DIR")
    outdir = Path(a.out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        lines = [l.strip() for l in Path(a.batch).read_text().splitlines()]
    except OSError as e:
        raise UsageError(str(e))
    worst = EXIT_OK
    k = 0
    for ln in lines:
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split(",")
        if len(parts) not in (8, 9):
            raise UsageError(f"batch line {k}: expected 8 or 9 numbers")
        vals = _vec(ln, len(parts), f"batch line {k}")
        T = vals[8] if len(vals) == 9 else a.T
        traj = _simulate_one(Configuration(*vals[:4]), AdjointState(*vals[4:8]), T, opts)
        io.write_json(traj, outdir / f"run_{k:04d}.json")
        status = "truncated" if traj.truncated else "ok"
        print(f"run_{k:04d}  segments={len(traj.segments)}  {status}")
        if traj.truncated:
            worst = EXIT_TRUNCATED
        k += 1
    return worst


def cmd_check(a) -> int:
    try:
        traj = io.read_json(a.file)
    except io.TrajectoryFileError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    report = check_pmp(traj)
    print(report.summary())
    if a.json:
        Path(a.json).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_plot(a) -> int:
    from .plot import render_svg

    if not a.glyph_interval > 0:
        raise UsageError("--glyph-interval must be positive")
    try:
        traj = io.read_json(a.file)
    except io.TrajectoryFileError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    svg = render_svg(traj, glyph_interval=a.glyph_interval, width=a.width, draw_lines=not a.no_lines)
    Path(a.output).write_text(svg)
    return EXIT_OK


def cmd_compose(a) -> int:
    try:
        q0, lam0, directives = io.read_script(a.script)
    except io.TrajectoryFileError as e:
        raise UsageError(str(e))
    traj = run_script(q0, directives, _options(a), lam0)
    _emit(traj, a)
    _summary(traj, sys.stderr if not a.out else sys.stdout)
    return EXIT_TRUNCATED if traj.truncated else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    num = argparse.ArgumentParser(add_help=False)
    num.add_argument("--h", type=float, default=1e-3, help="integrator / sampling step")
    num.add_argument("--eps-switch", type=float, default=1e-9)
    num.add_argument("--eps-merge", type=float, default=1e-6)
    num.add_argument("--max-switches", type=int, default=1000)
    num.add_argument("-o", "--out", help="output JSON (stdout if omitted)")
    num.add_argument("--csv", help="also write a flat CSV export")

    p = argparse.ArgumentParser(prog="trailer-extremals", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("primitive", parents=[num], help="generate a single primitive")
    pr.add_argument("kind", choices=["regular", "merge", "phiv", "singular"])
    for f in ("x0", "y0", "theta0", "beta0"):
        pr.add_argument(f"--{f}", type=float, default=0.0)
    pr.add_argument("--v", type=float, default=1.0)
    pr.add_argument("--omega", type=float, default=1.0)
    pr.add_argument("--dt", type=float)
    pr.add_argument("--lbeta0", type=float, default=0.0)
    pr.add_argument("--lambda0", help="full adjoint seed lx,ly,ltheta,lbeta (regular)")
    pr.add_argument("--branch", type=int, default=1)
    pr.add_argument("--beta-start", type=float)
    pr.add_argument("--reverse", action="store_true", help="merge: run the departing direction")
    pr.add_argument("--lambda-theta", type=float, default=0.5)
    pr.add_argument("--phi-v", type=float, default=1.0)
    pr.set_defaults(func=cmd_primitive)

    si = sub.add_parser("simulate", parents=[num], help="follow the extremal flow")
    si.add_argument("--q0", help="x,y,theta,beta (default 0,0,0,0)")
    si.add_argument("--lambda0", help="lx,ly,ltheta,lbeta (random from --seed if omitted)")
    si.add_argument("--T", type=float, default=5.0)
    si.add_argument("--seed", type=int, default=SEEDS.cli_default)
    si.add_argument("--batch", help="file of seeds, one run per line; writes run_NNNN.json into --out")
    si.set_defaults(func=cmd_simulate)

    ch = sub.add_parser("check", help="validate a trajectory file")
    ch.add_argument("file")
    ch.add_argument("--json", help="write the report as JSON")
    ch.set_defaults(func=cmd_check)

    pl = sub.add_parser("plot", help="render a trajectory file to SVG")
    pl.add_argument("file")
    pl.add_argument("output")
    pl.add_argument("--glyph-interval", type=float, default=1.0)
    pl.add_argument("--width", type=int, default=800)
    pl.add_argument("--no-lines", action="store_true")
    pl.set_defaults(func=cmd_plot)

    co = sub.add_parser("compose", parents=[num], help="run a composition script")
    co.add_argument("script")
    co.set_defaults(func=cmd_compose)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ScriptError, ModelError, SingularArcError, io.TrajectoryFileError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
