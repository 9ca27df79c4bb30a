"""Desk-scale experiments shared by the scripts and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .composer import MergingCurve, SimOptions, Straight, run_script, simulate_extremal
from .config import SEEDS
from .model import AdjointState, Configuration, Segment, Trajectory
from .singular import SingularArcState, propagate_phi_omega_singular, singular_constants


@dataclass(frozen=True)
class RegularCase:
    q0: Configuration
    lbeta0: float
    v: int
    omega: int
    dt: float


def random_regular_cases(n: int, rng: np.random.Generator, near_equilibrium: int = 0) -> list[RegularCase]:
    """Uniform draws; the last ``near_equilibrium`` start 1e-6..1e-2 away from beta = v*omega*pi/2."""
    out = []
    for k in range(n):
        v, w = (int(s) for s in rng.choice([-1, 1], size=2))
        if k >= n - near_equilibrium:
            off = 10 ** rng.uniform(-6, -2) * rng.choice([-1, 1])
            beta0 = v * w * math.pi / 2 + off
        else:
            beta0 = math.pi - rng.uniform(0, 2 * math.pi)  # (-pi, pi]
        q0 = Configuration(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-math.pi, math.pi), beta0)
        out.append(RegularCase(q0, rng.uniform(-5, 5), v, w, rng.uniform(0, 4)))
    return out


def random_auto_seed(rng: np.random.Generator):
    q0 = Configuration(*rng.uniform(-3, 3, size=4))
    return q0, AdjointState(*rng.normal(size=4)), float(rng.uniform(1, 10))


def random_singular_arc(rng: np.random.Generator, dt_max: float = 5.0, h: float = 1e-3) -> Segment:
    """A phi_omega-singular arc from a random start with |omega(0)| < 1."""
    while True:
        q0 = Configuration(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-math.pi, math.pi),
                           rng.uniform(-math.pi, math.pi))
        phi_v = float(rng.choice([-1, 1]) * rng.uniform(0.5, 2.0))
        lt0 = float(rng.uniform(-0.95, 0.95) * abs(phi_v))
        try:
            c = singular_constants(q0, lt0, phi_v)
        except ValueError:
            continue
        seg = propagate_phi_omega_singular(SingularArcState(q0, lt0, phi_v), c, rng.uniform(0.5, dt_max), h)
        if len(seg.samples) >= 10:
            return seg


@dataclass
class StraightLineDemoConfig:
    distance: float = 50.0
    beta: float = 0.4
    n_candidates: int = 40
    horizon: float = 120.0
    candidate_h: float = 1e-2
    seed: int = SEEDS.candidates


@dataclass
class StraightLineDemoResult:
    start: Configuration
    goal: Configuration
    msm: Trajectory
    msm_duration: float
    straight_length: float
    candidate_times: list = field(default_factory=list)  # first-passage time per candidate (inf if never)

    @property
    def best_regular(self) -> float:
        return min(self.candidate_times) if self.candidate_times else math.inf

    @property
    def margin(self) -> float:
        return self.best_regular - self.msm_duration


def merge_straight_merge(start: Configuration, length: float, beta_end: float) -> Trajectory:
    """Reverse onto the line, drive straight, then depart on the forward branch."""
    return run_script(start, [
        MergingCurve(sigma=-1, mode="merge"),
        Straight(length, v=1),
        MergingCurve(sigma=1, mode="depart", beta_end=beta_end),
    ])


def _length_for_distance(start: Configuration, beta: float, distance: float) -> float:
    base = merge_straight_merge(start, 0.0 + 1e-3, beta)
    a = np.array([base.final_q().x - start.x, base.final_q().y - start.y])
    q_line = base.segments[1].samples.final_q()
    u = np.array([math.cos(q_line.theta), math.sin(q_line.theta)])
    # |a + s u| = distance, s >= 0, with the 1e-3 probe already included in a
    b = float(a @ u)
    disc = b * b - (float(a @ a) - distance**2)
    return 1e-3 + (-b + math.sqrt(disc))


def first_passage_time(traj: Trajectory, origin: Configuration, distance: float) -> float:
    for seg in traj.segments:
        s = seg.samples
        r = np.hypot(s.q[:, 0] - origin.x, s.q[:, 1] - origin.y)
        hit = np.nonzero(r >= distance)[0]
        if hit.size:
            return float(s.t[hit[0]])
    return math.inf


def regular_candidates(start: Configuration, cfg: StraightLineDemoConfig):
    """All-regular extremals from seeded adjoints; half of them from the lambda_beta = 0 family."""
    rng = np.random.default_rng(cfg.seed)
    opts = SimOptions(h=cfg.candidate_h)
    for k in range(cfg.n_candidates):
        lam = rng.normal(size=4)
        if k % 2:
            lam[3] = 0.0
        traj = simulate_extremal(start, AdjointState(*lam), cfg.horizon, opts)
        if all(s.kind.is_regular for s in traj.segments):
            yield traj


def straight_line_demo(cfg: StraightLineDemoConfig = StraightLineDemoConfig()) -> StraightLineDemoResult:
    start = Configuration(0.0, 0.0, 0.0, cfg.beta)
    length = _length_for_distance(start, cfg.beta, cfg.distance)
    msm = merge_straight_merge(start, length, cfg.beta)
    goal = msm.final_q()
    res = StraightLineDemoResult(start, goal, msm, msm.duration, length)
    for traj in regular_candidates(start, cfg):
        res.candidate_times.append(first_passage_time(traj, start, cfg.distance))
    return res
