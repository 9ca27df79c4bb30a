"""Multi-segment extremals: regime classification, the adjoint-driven
simulator with closed-form regular stretches, and scripted compositions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .dynamics import EVENT_TIME_TOL
from .model import (
    wrap_angle,
    AdjointState,
    Configuration,
    ExtremalConstants,
    Line,
    ModelError,
    Samples,
    Segment,
    SegmentKind,
    Trajectory,
)
from .regular import regular_arrays, regular_samples
from .singular import (
    EPS_MERGE,
    SingularArcError,
    SingularArcState,
    expected_alpha,
    merging_feasible,
    merging_segment_from,
    phi_v_singular_segment,
    propagate_phi_omega_singular,
    singular_constants,
    straight_constants,
    straight_samples,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Regime:
    name: str  # Regular | PhiVSingular | PhiOmegaSingular | Straight | Abnormal
    v_sign: int = 0
    omega_sign: int = 0

    def __str__(self):
        if self.name == "Regular":
            return f"Regular({self.v_sign:+d},{self.omega_sign:+d})"
        return self.name


@dataclass(frozen=True)
class WindowEvidence:
    """Largest |phi| and |d phi/dt| seen for each switching function over a dwell window."""

    phi_v: float
    phi_omega: float


def _sgn(a: float) -> int:
    return 0 if a == 0.0 else (1 if a > 0 else -1)


def classify_regime(
    phi_v: float,
    phi_omega: float,
    lam: AdjointState,
    eps_switch: float = 1e-9,
    window: Optional[WindowEvidence] = None,
    eps_dwell: float = 1e-7,
) -> Regime:
    """Classify the control regime from switching values.

    A switching function counts as identically zero only if the dwell-window
    evidence says so; an isolated zero is a switch and yields a regular regime
    with a 0 sign in that slot.
    """
    zv = window is not None and window.phi_v <= eps_dwell
    zw = window is not None and window.phi_omega <= eps_dwell
    if zv and zw:
        return Regime("Abnormal")
    if zv:
        return Regime("PhiVSingular", 0, _sgn(phi_omega))
    if zw:
        if abs(lam.ltheta) <= eps_switch and abs(lam.lbeta) <= eps_switch:
            return Regime("Straight", _sgn(phi_v), 0)
        return Regime("PhiOmegaSingular", _sgn(phi_v), 0)
    sv = _sgn(phi_v) if abs(phi_v) > eps_switch else 0
    sw = _sgn(phi_omega) if abs(phi_omega) > eps_switch else 0
    return Regime("Regular", sv, sw)


@dataclass
class SimOptions:
    h: float = 1e-3
    eps_switch: float = 1e-9
    eps_dwell: float = 1e-7
    eps_merge: float = EPS_MERGE
    max_switches: int = 1000
    v_singular: float = 0.0
    probe: float = 1e-6


def _psi(q: Configuration, lam: AdjointState) -> float:
    # d(phi_omega)/dt = v * psi and d(phi_v)/dt = -omega * psi
    return lam.lx * math.sin(q.theta) - lam.ly * math.cos(q.theta) + lam.lbeta * math.cos(q.beta)


def _switching(q: Configuration, lam: AdjointState):
    pv = lam.lx * math.cos(q.theta) + lam.ly * math.sin(q.theta) - lam.lbeta * math.sin(q.beta)
    return pv, lam.ltheta + lam.lbeta


def _regular_phis(q0: Configuration, lam0: AdjointState, v: int, w: int, tau):
    Q, LB = regular_arrays(q0, lam0.lbeta, v, w, tau)
    lt = lam0.ltheta + lam0.lx * (Q[:, 1] - q0.y) - lam0.ly * (Q[:, 0] - q0.x)
    pv = lam0.lx * np.cos(Q[:, 2]) + lam0.ly * np.sin(Q[:, 2]) - LB * np.sin(Q[:, 3])
    return pv, lt + LB


def _pick_bang(q, lam, opts: SimOptions, prefer_omega: int = 0):
    """Corner control whose switching signs hold just after the current state."""
    pv, pw = _switching(q, lam)
    cands = []
    for v in (1, -1):
        for w in (1, -1):
            if abs(pv) > opts.eps_switch and v != _sgn(pv):
                continue
            if abs(pw) > opts.eps_switch and w != _sgn(pw):
                continue
            cands.append((v, w))
    if prefer_omega:
        cands.sort(key=lambda c: c[1] != prefer_omega)
    for v, w in cands:
        a, b = _regular_phis(q, lam, v, w, [opts.probe])
        if a[0] * v > 0 and b[0] * w > 0:
            return v, w
    if prefer_omega:
        for v, w in cands:
            a, _ = _regular_phis(q, lam, v, w, [opts.probe])
            if a[0] * v > 0 and w == prefer_omega:
                return v, w
    return None


def _first_violation(q, lam, v, w, horizon, opts: SimOptions, slack: float = 0.0):
    """First local time in (0, horizon] at which a switching sign is violated."""
    n = max(1, int(math.ceil(horizon / opts.h)))
    tau = np.linspace(0.0, horizon, n + 1)
    pv, pw = _regular_phis(q, lam, v, w, tau)
    g = np.minimum(pv * v, pw * w + slack)
    bad = np.nonzero(g[1:] < 0.0)[0]
    if bad.size == 0:
        return None
    k = bad[0] + 1
    lo, hi = tau[k - 1], tau[k]
    while hi - lo > EVENT_TIME_TOL:
        mid = 0.5 * (lo + hi)
        a, b = _regular_phis(q, lam, v, w, [mid])
        if min(a[0] * v, b[0] * w + slack) < 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def _singular_window(q, lam) -> WindowEvidence:
    pv, pw = _switching(q, lam)
    psi = abs(_psi(q, lam))
    return WindowEvidence(max(abs(pv), psi), max(abs(pw), psi))


def simulate_extremal(
    q0: Configuration,
    lam0: AdjointState,
    T: float,
    options: Optional[SimOptions] = None,
) -> Trajectory:
    """Follow the extremal flow from (q0, lam0) for time T."""
    opts = options or SimOptions()
    if lam0.is_trivial():
        raise ModelError("adjoint seed must be nonzero")
    if not T > 0:
        raise ModelError("T must be positive")
    c = ExtremalConstants.from_initial(q0, lam0)
    traj = Trajectory(c)
    t, q, lam = 0.0, q0, lam0
    prefer_omega = 0
    snap = None
    while T - t > 1e-12:
        if len(traj.segments) > opts.max_switches:
            log.warning("more than %d switches: truncating at t=%g", opts.max_switches, t)
            traj.truncated = True
            break
        pv, pw = _switching(q, lam)
        regime = classify_regime(pv, pw, lam, opts.eps_switch, _singular_window(q, lam), opts.eps_dwell)
        horizon = T - t
        if regime.name in ("PhiVSingular", "Abnormal"):
            omega = _sgn(lam.ltheta) or 1
            vs = opts.v_singular
            seg = phi_v_singular_segment(q, omega, lambda s: vs, horizon, opts.h, c3=lam.ltheta or 1.0, t0=t)
            seg.constants = None
        elif regime.name == "Straight":
            v = regime.v_sign or 1
            seg = Segment(SegmentKind.STRAIGHT, straight_samples(q, lam, v, horizon, opts.h, t0=t))
        else:
            seg = None
            if regime.name == "PhiOmegaSingular":
                start = SingularArcState(q, lam.ltheta, pv)
                seg = propagate_phi_omega_singular(start, c, horizon, opts.h, opts.eps_merge, t0=t)
                seg.constants = None
                if len(seg.samples) < 2:
                    # already at the edge of the band: leave on the saturated turn
                    prefer_omega = _sgn(lam.ltheta / pv) or 1
                    seg = None
                elif seg.exit_reason == "saturation":
                    prefer_omega = _sgn(seg.samples.u[-1, 1])
            if seg is None:
                seg = _bang_segment(t, q, lam, horizon, opts, prefer_omega)
                prefer_omega = 0
        if len(seg.samples) < 2:
            raise SingularArcError(f"zero-length segment at t={t} ({regime})")
        if snap is not None:
            seg.meta["snap"] = snap
            snap = None
        traj.segments.append(seg)
        t = seg.t_end
        q = seg.samples.final_q()
        lam = seg.samples.final_lam()
        if seg.exit_reason == "touchdown":
            # Auto mode stays on the line after a merge
            v = int(_sgn(seg.samples.u[-1, 0]) or 1)
            q_new = snap_to_line(q, c.line())
            lam_new = _straight_adjoint(q_new, v, math.hypot(c.c1, c.c2))
            snap = _snap_record(q, q_new, lam, lam_new)
            q, lam = q_new, lam_new
    return traj


def _bang_segment(t, q, lam, horizon, opts: SimOptions, prefer_omega: int) -> Segment:
    signs = _pick_bang(q, lam, opts, prefer_omega)
    if signs is None:
        pv, pw = _switching(q, lam)
        raise SingularArcError(f"no consistent control at t={t}: phi=({pv}, {pw})")
    v, w = signs
    # leaving a singular arc phi_omega starts at zero; tolerate that round-off band
    slack = opts.eps_switch if prefer_omega else 0.0
    te = _first_violation(q, lam, v, w, horizon, opts, slack)
    dt = horizon if te is None else te
    return Segment(SegmentKind.regular(v, w), regular_samples(q, lam, v, w, dt, opts.h, t0=t),
                   "duration" if te is None else "switch")


def _straight_adjoint(q: Configuration, v: int, scale: float = 1.0) -> AdjointState:
    c = straight_constants(q, v, scale)
    return AdjointState(c.c1, c.c2, 0.0, 0.0)


def snap_to_line(q: Configuration, line: Line) -> Configuration:
    """The straight on-line state nearest q: on the line, heading along it, beta = 0 (or pi)."""
    n = line.normalized()
    d = n.c1 * q.y - n.c2 * q.x + n.c3
    x, y = q.x + n.c2 * d, q.y - n.c1 * d
    theta = q.theta + wrap_angle(n.direction - q.theta)
    if math.cos(theta - q.theta) < 0:
        theta = q.theta + wrap_angle(n.direction + math.pi - q.theta)
    beta = math.pi * round(q.beta / math.pi)
    return Configuration(x, y, theta, beta)


def unsnap_from_line(q: Configuration, sigma: int, eps_merge: float, sign: int = 1) -> Configuration:
    """Point of the merge manifold (v = sigma) at |sin beta| = eps_merge next to an on-line state."""
    line = Line(math.cos(q.theta), math.sin(q.theta), 0.0)
    line = Line(line.c1, line.c2, -(line.c1 * q.y - line.c2 * q.x))
    beta0 = math.pi * round(q.beta / math.pi)
    beta = beta0 + sign * math.asin(eps_merge) * (1 if math.cos(beta0) > 0 else -1)
    d = sigma * 2.0 * math.sin(beta)
    theta_l = q.theta - float(expected_alpha(beta0, sigma, sigma))
    theta = theta_l + float(expected_alpha(beta, sigma, sigma))
    return Configuration(q.x - math.sin(theta_l) * d, q.y + math.cos(theta_l) * d,
                         q.theta + wrap_angle(theta - q.theta), beta)


def _snap_record(q_old: Configuration, q_new: Configuration,
                 old: Optional[AdjointState], new: AdjointState) -> dict:
    dq = np.abs(q_old.as_array() - q_new.as_array())
    rec = {"config_jump": float(dq.max())}
    if old is not None:
        rec["adjoint_jump"] = float(np.max(np.abs(old.as_array() - new.as_array())))
    return rec


# ----------------------------------------------------------------- scripting


@dataclass(frozen=True)
class Auto:
    duration: float


@dataclass(frozen=True)
class Regular:
    v: int
    omega: int
    dt: float
    lam: Optional[tuple] = None


@dataclass(frozen=True)
class MergingCurve:
    """Merging curve fitted through the current state.

    ``mode="merge"`` requires forward time to straighten the trailer and runs
    to touchdown; ``mode="depart"`` requires the opposite and runs until
    ``|sin beta|`` reaches ``|sin beta_end|`` or the rate saturates.
    """

    sigma: int
    mode: str = "merge"
    beta_end: Optional[float] = None
    eps_merge: float = EPS_MERGE


@dataclass(frozen=True)
class Straight:
    length: float
    v: int = 1


@dataclass(frozen=True)
class PhiVSingular:
    omega: int
    v_profile: Union[float, Callable[[float], float]]
    dt: float


@dataclass(frozen=True)
class PhiOmegaSingular:
    lambda_theta: float
    phi_v: float
    dt: float


Directive = Union[Auto, Regular, MergingCurve, Straight, PhiVSingular, PhiOmegaSingular]


class ScriptError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(f"directive {index}: {message}")
        self.index = index


def fit_merge_line(q: Configuration, sigma: int) -> Line:
    """The line for which q lies on the merge manifold of branch sigma (v = sigma)."""
    theta_l = q.theta - float(expected_alpha(q.beta, sigma, sigma))
    c1, c2 = math.cos(theta_l), math.sin(theta_l)
    d = sigma * 2.0 * math.sin(q.beta)
    return Line(c1, c2, d - (c1 * q.y - c2 * q.x))


def _beta_shrinks(q: Configuration, v: int, line: Line) -> bool:
    n = line.normalized()
    w = n.c1 * q.y - n.c2 * q.x + n.c3
    return math.sin(q.beta) * math.cos(q.beta) * (w - v * math.sin(q.beta)) < 0.0


def run_script(
    q0: Configuration,
    script: list,
    options: Optional[SimOptions] = None,
    lam0: Optional[AdjointState] = None,
) -> Trajectory:
    """Concatenate directives from q0.

    Explicit directives reseed their own adjoint (stored per segment); ``Auto``
    continues from the adjoint at the end of the previous segment.
    """
    opts = options or SimOptions()
    traj = Trajectory(None)
    t, q, lam = 0.0, q0, lam0
    for i, d in enumerate(script):
        try:
            segs = _run_directive(d, t, q, lam, opts, traj.segments[-1] if traj.segments else None)
        except (ModelError, SingularArcError, ValueError) as e:
            if isinstance(e, ScriptError):
                raise
            raise ScriptError(i, str(e)) from e
        for s in segs:
            s.meta.setdefault("directive", i)
        traj.segments.extend(segs)
        if segs:
            last = segs[-1]
            t, q, lam = last.t_end, last.samples.final_q(), last.samples.final_lam()
    if traj.segments:
        traj.constants = traj.segment_constants(traj.segments[0])
    return traj


def _run_directive(d, t, q, lam, opts: SimOptions, prev: Optional[Segment]) -> list[Segment]:
    if isinstance(d, Auto):
        if lam is None:
            raise ValueError("Auto needs an adjoint: give lam0 or precede it with another directive")
        sub = simulate_extremal(q, lam, d.duration, opts)
        for s in sub.segments:
            s.samples = s.samples.shifted(t)
            s.constants = s.constants or sub.constants
        return sub.segments
    if isinstance(d, Regular):
        if d.v not in (1, -1) or d.omega not in (1, -1):
            raise ValueError("regular primitives need v, omega in {-1, +1}")
        seed = AdjointState(*d.lam) if d.lam is not None else AdjointState(0.0, 0.0, float(d.omega), 0.0)
        seg = Segment(SegmentKind.regular(d.v, d.omega), regular_samples(q, seed, d.v, d.omega, d.dt, opts.h, t),
                      constants=ExtremalConstants.from_initial(q, seed), meta={"reseed": True})
        return [seg]
    if isinstance(d, Straight):
        if d.v not in (1, -1):
            raise ValueError("straight motion needs v in {-1, +1}")
        q_start = q
        if prev is not None and prev.exit_reason == "touchdown" and prev.meta.get("merging"):
            q_start = snap_to_line(q, Line(*prev.meta["line"]))
        seed = _straight_adjoint(q_start, d.v)
        seg = Segment(SegmentKind.STRAIGHT, straight_samples(q_start, seed, d.v, d.length, opts.h, t),
                      constants=straight_constants(q_start, d.v), meta={"reseed": True})
        if q_start != q:
            seg.meta["snap"] = _snap_record(q, q_start, lam, seed)
        return [seg]
    if isinstance(d, PhiVSingular):
        prof = d.v_profile if callable(d.v_profile) else (lambda s, c=float(d.v_profile): c)
        return [phi_v_singular_segment(q, d.omega, prof, d.dt, opts.h, t0=t)]
    if isinstance(d, PhiOmegaSingular):
        c = singular_constants(q, d.lambda_theta, d.phi_v)
        seg = propagate_phi_omega_singular(SingularArcState(q, d.lambda_theta, d.phi_v), c, d.dt, opts.h,
                                           opts.eps_merge, t)
        seg.meta["reseed"] = True
        return [seg]
    if isinstance(d, MergingCurve):
        if d.sigma not in (1, -1):
            raise ValueError("sigma must be +-1")
        if d.mode not in ("merge", "depart"):
            raise ValueError(f"mode must be 'merge' or 'depart', got {d.mode!r}")
        if not merging_feasible(q.beta):
            raise ValueError(f"beta = {q.beta:.6g} outside the merging band")
        q_start = q
        if d.mode == "depart" and abs(math.sin(q.beta)) < d.eps_merge:
            # beta = 0 is an equilibrium of the merging loop: start eps_merge off it
            sign = 1 if d.beta_end is None or math.sin(d.beta_end) >= 0 else -1
            q_start = unsnap_from_line(q, d.sigma, d.eps_merge, sign)
        line = fit_merge_line(q_start, d.sigma)
        shrinks = _beta_shrinks(q_start, d.sigma, line)
        if d.mode == "merge" and not shrinks:
            raise ValueError("forward motion on this branch does not straighten the trailer; use mode='depart'")
        if d.mode == "depart" and shrinks:
            raise ValueError("forward motion on this branch straightens the trailer; use mode='merge'")
        seg = merging_segment_from(q_start, line, d.sigma, d.sigma, d.eps_merge, opts.h, t0=t, time_direction=1,
                                   beta_end=d.beta_end)
        seg.meta["reseed"] = True
        if q_start is not q:
            seg.meta["snap"] = _snap_record(q, q_start, lam, seg.samples.final_lam())
        return [seg]
    raise TypeError(f"unknown directive {d!r}")
