"""Checker residuals on oracle-integrated extremals versus integrator step.

Integrates bang-bang extremals with the fixed-step RK4 oracle (no closed
forms) at several steps and reports the largest checker residual per check,
together with the observed order between successive steps.
"""

import argparse
import math

import numpy as np

from trailer_extremals.checker import CHECKS, check_pmp
from trailer_extremals.config import SEEDS
from trailer_extremals.dynamics import integrate_bang_bang
from trailer_extremals.model import AdjointState, Configuration, Samples, Segment, SegmentKind, Trajectory


def oracle_trajectory(q0, lam0, T, h):
    samples, _ = integrate_bang_bang(q0, lam0, T, h, max_switches=1000)
    # one segment per constant-control run, so each carries its regular kind
    u = samples.u
    cuts = [0] + [i for i in range(1, len(samples)) if np.any(u[i] != u[i - 1])] + [len(samples)]
    segs = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        s = Samples(samples.t[a:b], samples.q[a:b], samples.lam[a:b], samples.u[a:b])
        if len(s) >= 2:
            segs.append(Segment(SegmentKind.regular(*u[a]), s))
    return Trajectory(None, segs)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--T", type=float, default=4.0)
    a = ap.parse_args()
    rng = np.random.default_rng(SEEDS.auto_runs)
    seeds = [(Configuration(*rng.uniform(-1, 1, 4)), AdjointState(*rng.normal(size=4))) for _ in range(a.runs)]
    steps = [1e-2, 5e-3, 2.5e-3]
    table = {}
    for h in steps:
        worst = dict.fromkeys(CHECKS, 0.0)
        for q0, lam0 in seeds:
            rep = check_pmp(oracle_trajectory(q0, lam0, a.T, h))
            for n, c in rep.checks.items():
                if c.applicable:
                    worst[n] = max(worst[n], c.max_residual)
        table[h] = worst
    print(f"{'check':<22}" + "".join(f"{h:>12.1e}" for h in steps) + "   order")
    for n in CHECKS:
        vals = [table[h][n] for h in steps]
        order = ""
        if vals[-1] > 0 and vals[-2] > 0:
            order = f"{math.log(vals[-2] / vals[-1], 2):6.2f}"
        print(f"{n:<22}" + "".join(f"{v:>12.3e}" for v in vals) + f"   {order}")
