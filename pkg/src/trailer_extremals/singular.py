"""Singular primitives: phi_v-singular rotations, phi_omega-singular arcs under
the feedback ``omega = lambda_theta / |phi_v|``, and merging curves.

Merging-curve branch convention
-------------------------------
With ``l`` oriented by (c1, c2), ``d`` its signed distance and ``alpha`` the
heading angle measured from (c1, c2), a configuration on the branch ``sigma``
satisfies ``d = sigma * 2 sin(beta)`` and ``alpha = sigma * 2 beta`` when
driving forward (``alpha = pi - sigma * 2 beta`` when reversing). Substituting
into the closed loop shows the relations are invariant only for
``sigma == v``; other pairings drift off the manifold immediately and
``merging_curve`` reports them as inconsistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import DEFAULT_H, integrate_until
from .model import (
    AdjointState,
    Configuration,
    ExtremalConstants,
    Line,
    ModelError,
    Samples,
    Segment,
    SegmentKind,
    signed_distance,
    wrap_angle,
    wrap_angles,
)

RADICAND_TOL = 1e-12
EPS_MERGE = 1e-6
MANIFOLD_DRIFT_TOL = 1e-4
SATURATION_SLACK = 1e-12


class SingularArcError(ValueError):
    pass


@dataclass(frozen=True)
class SingularArcState:
    q: Configuration
    lambda_theta: float
    phi_v: float

    def __post_init__(self):
        if self.phi_v == 0.0:
            raise SingularArcError("phi_v must be nonzero on a phi_omega-singular arc")

    @property
    def v(self) -> int:
        return 1 if self.phi_v > 0 else -1

    @property
    def lambda_beta(self) -> float:
        return -self.lambda_theta


@dataclass(frozen=True)
class MergeBranch:
    sigma: int

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ModelError("merge branch sigma must be +1 or -1")


# ---------------------------------------------------------------- phi_v-singular


def phi_v_singular_segment(
    q0: Configuration,
    omega: int,
    v_profile: Callable[[float], float],
    dt: float,
    h: float = DEFAULT_H,
    c3: Optional[float] = None,
    t0: float = 0.0,
) -> Segment:
    """Rotation at full angular rate with an arbitrary speed profile.

    The adjoint is held at (0, 0, c3, 0); ``c3`` defaults to ``omega``.
    ``v_profile`` receives the time elapsed since the segment start.
    """
    if omega not in (1, -1):
        raise ModelError("phi_v-singular primitives need omega = +-1")
    c3 = float(omega) if c3 is None else c3
    if c3 == 0.0 or math.copysign(1, c3) != omega:
        raise ModelError("sign(c3) must equal omega")
    lam0 = AdjointState(0.0, 0.0, c3, 0.0)
    consts = ExtremalConstants(0.0, 0.0, c3, 0.0)

    def law(t, q, lam):
        v = float(v_profile(t - t0))
        return (max(-1.0, min(1.0, v)), float(omega))

    if dt == 0.0:
        samples = Samples([t0], [q0.as_array()], [lam0.as_array()], [law(t0, None, None)])
        return Segment(SegmentKind.PHI_V_SINGULAR, samples, "empty", consts)
    samples, _ = integrate_until(q0, lam0, law, dt, h, t0=t0)
    return Segment(SegmentKind.PHI_V_SINGULAR, samples, "duration", consts)


# ------------------------------------------------------------ phi_omega-singular


def singular_omega(q: Configuration, c: ExtremalConstants, phi_v: float) -> float:
    """Singular angular rate; not clamped, callers detect saturation."""
    if phi_v == 0.0:
        raise SingularArcError("singular angular rate undefined for phi_v = 0")
    return (c.c1 * q.y - c.c2 * q.x + c.c3) / abs(phi_v)


def singular_constants(q0: Configuration, lambda_theta0: float, phi_v: float) -> ExtremalConstants:
    """Constants making (q0, lambda_theta0, phi_v) the start of a singular arc.

    Solves ``phi_v = c1 cos th + c2 sin th + lt sin be`` together with the
    vanishing first derivative of phi_omega, ``c1 sin th - c2 cos th = lt cos be``.
    """
    th, be = q0.theta, q0.beta
    a = phi_v - lambda_theta0 * math.sin(be)
    b = lambda_theta0 * math.cos(be)
    c1 = a * math.cos(th) + b * math.sin(th)
    c2 = a * math.sin(th) - b * math.cos(th)
    c3 = lambda_theta0 - c1 * q0.y + c2 * q0.x
    return ExtremalConstants(c1, c2, c3, -lambda_theta0)


def _singular_residuals(q: Configuration, lt: float, phi_v: float, c: ExtremalConstants):
    lb = -lt
    pv = c.c1 * math.cos(q.theta) + c.c2 * math.sin(q.theta) - lb * math.sin(q.beta)
    psi = c.c1 * math.sin(q.theta) - c.c2 * math.cos(q.theta) + lb * math.cos(q.beta)
    affine = c.c1 * q.y - c.c2 * q.x + c.c3
    return abs(affine - lt), abs(pv - phi_v), abs(psi)


def propagate_phi_omega_singular(
    start: SingularArcState,
    c: ExtremalConstants,
    dt: float,
    h: float = DEFAULT_H,
    eps_merge: float = EPS_MERGE,
    t0: float = 0.0,
) -> Segment:
    """Closed-loop integration of a phi_omega-singular arc.

    Stops after ``dt`` or at the first of: saturation (``|omega|`` reaches 1),
    loss of sign of phi_v, or tangential touchdown on the line ``l``.
    """
    scale = max(1.0, abs(start.phi_v), abs(start.lambda_theta))
    res = _singular_residuals(start.q, start.lambda_theta, start.phi_v, c)
    if max(res) > 1e-9 * scale:
        raise SingularArcError(f"start state is not on a singular arc for these constants: residuals {res}")
    w0 = singular_omega(start.q, c, start.phi_v)
    if abs(w0) > 1.0 + SATURATION_SLACK:
        raise SingularArcError(f"initial singular rate |omega| = {abs(w0)} exceeds 1")
    v = float(start.v)
    apv = abs(start.phi_v)
    cn = math.hypot(c.c1, c.c2)

    def law(t, q, lam):
        return (v, (c.c1 * q[1] - c.c2 * q[0] + c.c3) / apv)

    def touch(t, z):
        if cn == 0.0:
            return 1.0
        lt = c.c1 * z[1] - c.c2 * z[0] + c.c3
        ang = math.sin(z[2] - math.atan2(c.c2, c.c1))
        return max(abs(lt) / cn, abs(ang)) - eps_merge

    lam0 = AdjointState(c.c1, c.c2, start.lambda_theta, -start.lambda_theta)
    events = {
        "saturation": lambda t, z: (1.0 - SATURATION_SLACK) - abs(law(t, z, None)[1]),
        "phi_v_sign": lambda t, z: v
        * (z[4] * math.cos(z[2]) + z[5] * math.sin(z[2]) - z[7] * math.sin(z[3])),
    }
    on_line = touch(t0, tuple(start.q.as_array()) + tuple(lam0.as_array())) <= 0.0
    if not on_line:
        events["touchdown"] = touch
    kind = SegmentKind.STRAIGHT if on_line and c.c4 == 0.0 else SegmentKind.PHI_OMEGA_SINGULAR
    if dt == 0.0:
        samples = Samples([t0], [start.q.as_array()], [lam0.as_array()], [law(t0, start.q.as_array(), None)])
        return Segment(kind, samples, "empty", c)
    samples, reason = integrate_until(start.q, lam0, law, dt, h, events=events, t0=t0)
    return Segment(kind, samples, reason, c, meta={"phi_v": start.phi_v})


def lambda_theta_singular(lambda_theta0, beta0, beta, phi_v, branch: int):
    """lambda_theta on a singular arc from the conserved quantity, one branch."""
    rad = lambda_theta0**2 - 2.0 * phi_v * lambda_theta0 * math.sin(beta0) + phi_v**2 * np.sin(beta) ** 2
    rad = np.asarray(rad, dtype=float)
    if np.any(rad < -RADICAND_TOL):
        raise SingularArcError(f"negative radicand {float(np.min(rad))}: inconsistent arc")
    root = np.sqrt(np.maximum(rad, 0.0))
    out = phi_v * np.sin(beta) + branch * root
    return float(out) if out.ndim == 0 else out


def singular_invariant(lambda_theta, beta, phi_v):
    """E = lambda_theta^2 / 2 - phi_v * lambda_theta * sin(beta)."""
    return 0.5 * lambda_theta**2 - phi_v * lambda_theta * np.sin(beta)


def singphi_value(lambda_theta0: float, beta0: float) -> float:
    """phi_v needed for a singular arc to reach the line lambda_theta = 0."""
    s = math.sin(beta0)
    if abs(s) < 1e-15:
        if lambda_theta0 == 0.0:
            return 0.0
        raise SingularArcError("sin(beta0) = 0 with lambda_theta0 != 0: no finite phi_v")
    return lambda_theta0 / (2.0 * s)


# ---------------------------------------------------------------- merging curves


def merging_feasible(beta: float) -> bool:
    """|sin beta| <= 1/2, i.e. beta in [-pi/6, pi/6] or [5pi/6, 7pi/6]."""
    return abs(math.sin(wrap_angle(beta))) <= 0.5 + 1e-15


def heading_line_angle(l: Line, theta):
    return wrap_angles(np.asarray(theta) - l.direction)


def expected_alpha(beta, sigma: int, v: int):
    """Heading-to-line angle on the merge manifold (pi - ... when reversing)."""
    a = sigma * 2.0 * np.asarray(beta)
    return a if v > 0 else math.pi - a


def merge_manifold_config(l: Line, s: float, beta: float, branch: MergeBranch, v: int = 1) -> Configuration:
    """Configuration at station ``s`` along ``l`` on the merge manifold."""
    if not merging_feasible(beta):
        raise ModelError(f"beta = {beta} outside the merging band |sin beta| <= 1/2")
    n = l.normalized()
    p0 = np.array([n.c2 * n.c3, -n.c1 * n.c3])
    direction = np.array([n.c1, n.c2])
    normal = np.array([-n.c2, n.c1])
    d = branch.sigma * 2.0 * math.sin(beta)
    p = p0 + s * direction + d * normal
    theta = l.direction + float(expected_alpha(beta, branch.sigma, v))
    return Configuration(float(p[0]), float(p[1]), theta, beta)


def manifold_residuals(l: Line, sigma: int, v: int, q: np.ndarray):
    """(|d - sigma 2 sin beta|, |alpha - expected alpha|) per sample row of q."""
    d = signed_distance(l, q[:, 0], q[:, 1])
    r_d = np.abs(d - sigma * 2.0 * np.sin(q[:, 3]))
    r_a = np.abs(wrap_angles(heading_line_angle(l, q[:, 2]) - expected_alpha(q[:, 3], sigma, v)))
    return r_d, r_a


def merge_constants(l: Line, q: Configuration) -> ExtremalConstants:
    """Adjoint constants of the merging curve through q: |(c1, c2)| = 1."""
    n = l.normalized()
    d = float(signed_distance(n, q.x, q.y))
    # lambda_beta(0) = -lambda_theta(0) = -d
    return ExtremalConstants(n.c1, n.c2, n.c3, -d)


def merging_segment_from(
    q0: Configuration,
    l: Line,
    v: int,
    sigma: int,
    eps_merge: float = EPS_MERGE,
    h: float = DEFAULT_H,
    reverse: bool = False,
    t0: float = 0.0,
    max_time: float = 200.0,
    time_direction: Optional[int] = None,
    beta_end: Optional[float] = None,
) -> Segment:
    """Merging-curve integration from an arbitrary start ``q0`` relative to ``l``.

    ``time_direction`` overrides the automatic choice (the direction in which
    ``|sin beta|`` shrinks, flipped by ``reverse``). When ``|sin beta|`` grows,
    the run stops at saturation or, if given, once ``|sin beta|`` reaches
    ``|sin beta_end|``.
    """
    if v not in (1, -1):
        raise ModelError("v must be +-1 on a merging curve")
    n = l.normalized()
    c = merge_constants(n, q0)
    d0 = -c.c4
    lam0 = AdjointState(n.c1, n.c2, d0, -d0)

    def law(t, q, lam):
        return (float(v), n.c1 * q[1] - n.c2 * q[0] + n.c3)

    w0 = d0
    beta_rate = w0 - v * math.sin(q0.beta)
    shrinking = math.sin(q0.beta) * math.cos(q0.beta) * beta_rate < 0.0
    direction = 1 if shrinking else -1
    if reverse:
        direction = -direction
    if time_direction is not None:
        direction = time_direction
    grows = shrinking != (direction == 1)
    events = {"saturation": lambda t, z: (1.0 - SATURATION_SLACK) - abs(law(t, z, None)[1])}
    if not grows:
        events["touchdown"] = lambda t, z: abs(math.sin(z[3])) - eps_merge
    elif beta_end is not None:
        target = abs(math.sin(beta_end))
        events["target"] = lambda t, z: target - abs(math.sin(z[3]))
    raw, reason = integrate_until(q0, lam0, law, max_time, h, events=events, direction=direction)
    if direction < 0:
        raw = Samples(
            (raw.t[::-1] - raw.t[-1]),
            raw.q[::-1], raw.lam[::-1], raw.u[::-1],
        )
    # lambda_beta = -lambda_theta is the singular-arc identity; integrating it instead
    # amplifies round-off exponentially along departing arcs
    lam = raw.lam.copy()
    lam[:, 3] = -lam[:, 2]
    samples = Samples(raw.t, raw.q, lam, raw.u).shifted(t0)
    r_d, r_a = manifold_residuals(n, sigma, v, samples.q)
    drift = float(max(r_d.max(), r_a.max()))
    if drift > MANIFOLD_DRIFT_TOL:
        raise SingularArcError(
            f"merge manifold drift {drift:.3g} for sigma={sigma}, v={v}: inconsistent branch pairing"
        )
    meta = {
        "merging": True,
        "sigma": sigma,
        "v": v,
        "line": [n.c1, n.c2, n.c3],
        "time_direction": direction,
        "phi_v": float(v),
    }
    if reason == "duration":
        reason = "max_time"
    return Segment(SegmentKind.PHI_OMEGA_SINGULAR, samples, reason, c, meta)


def merging_curve(
    l: Line,
    v: int,
    branch: MergeBranch,
    beta_start: float,
    eps_merge: float = EPS_MERGE,
    h: float = DEFAULT_H,
    reverse: bool = False,
    t0: float = 0.0,
) -> Segment:
    """Merging curve starting on the manifold at station 0 of ``l``.

    Integrated in the time direction in which ``|sin beta|`` shrinks until it
    drops to ``eps_merge``; with ``reverse=True`` in the opposite direction
    until ``|omega|`` saturates at the edge of the band. The returned segment is
    always ordered in forward physical time.
    """
    if not merging_feasible(beta_start):
        raise ModelError(f"beta_start = {beta_start} outside the merging band")
    if abs(math.sin(beta_start)) <= eps_merge:
        q = merge_manifold_config(l, 0.0, beta_start, branch, v)
        c = merge_constants(l, q)
        lam = AdjointState(c.c1, c.c2, -c.c4, c.c4)
        s = Samples([t0], [q.as_array()], [lam.as_array()], [[float(v), -c.c4]])
        return Segment(SegmentKind.PHI_OMEGA_SINGULAR, s, "touchdown", c,
                       {"merging": True, "sigma": branch.sigma, "v": v,
                        "line": [c.c1, c.c2, c.c3], "time_direction": 1, "phi_v": float(v)})
    q0 = merge_manifold_config(l, 0.0, beta_start, branch, v)
    return merging_segment_from(q0, l, v, branch.sigma, eps_merge, h, reverse, t0)


# ---------------------------------------------------------------- straight motion


def straight_constants(q: Configuration, v: int, scale: float = 1.0) -> ExtremalConstants:
    """Constants (c1, c2, c3, 0) whose line passes through q along its heading."""
    c1, c2 = scale * v * math.cos(q.theta), scale * v * math.sin(q.theta)
    return ExtremalConstants(c1, c2, -(c1 * q.y - c2 * q.x), 0.0)


def straight_samples(q0: Configuration, lam0: AdjointState, v: int, length: float,
                     h: float = DEFAULT_H, t0: float = 0.0) -> Samples:
    """Straight motion at speed |v| = 1 with omega = 0, in closed form.

    The trailer relaxes as ``tan(beta/2) = tan(beta0/2) exp(-v t)``; lambda_beta
    follows ``lambda_beta0 exp(int v cos beta)`` which for this flow equals
    ``lambda_beta0 * sin(beta)/sin(beta0)`` (``cosh`` form used to stay finite).
    """
    if v not in (1, -1):
        raise ModelError("straight motion needs v = +-1")
    n = max(1, int(math.ceil(length / h - 1e-9))) if length > 0 else 0
    tau = np.minimum(np.arange(n + 1) * h, length)
    if n:
        tau[-1] = length
    half = 0.5 * q0.beta
    s0, c0 = math.sin(half), math.cos(half)
    half_t = np.arctan2(s0 * np.exp(-0.5 * v * tau), c0 * np.exp(0.5 * v * tau))
    beta = q0.beta + 2.0 * (half_t - math.atan2(s0, c0))
    Q = np.empty((tau.size, 4))
    Q[:, 0] = q0.x + v * math.cos(q0.theta) * tau
    Q[:, 1] = q0.y + v * math.sin(q0.theta) * tau
    Q[:, 2] = q0.theta
    Q[:, 3] = beta
    lam = np.tile(lam0.as_array(), (tau.size, 1))
    lam[:, 2] = lam0.ltheta + lam0.lx * (Q[:, 1] - q0.y) - lam0.ly * (Q[:, 0] - q0.x)
    # exp(int_0^t v cos beta) = cosh-ratio of the relaxed half angle
    ratio = (s0**2 * np.exp(-v * tau) + c0**2 * np.exp(v * tau))
    lam[:, 3] = lam0.lbeta * ratio
    u = np.tile([float(v), 0.0], (tau.size, 1))
    return Samples(t0 + tau, Q, lam, u)
