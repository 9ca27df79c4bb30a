"""Closed-form propagation along the four bang-bang regular primitives.

Time is local to the primitive (``dt`` measured from its start).

The trailer angle is computed from a conserved cotangent rather than from the
textbook ``2 (v/w) arctan((t - 2v + K1)/(t + K1))`` expression. With
``gamma = beta - v*w*pi/2`` the trailer equation becomes
``d gamma/dt = 2 w sin^2(gamma/2)``, hence ``cot(gamma/2) + w t`` is constant.
Both forms agree modulo 2*pi; the cotangent form is continuous in ``dt`` and
stays finite when ``beta0`` is close to the equilibrium or to pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    AdjointState,
    Configuration,
    ExtremalConstants,
    ModelError,
    Samples,
    Segment,
    SegmentKind,
    wrap_angle,
)

EQUILIBRIUM_TOL = 1e-12


@dataclass(frozen=True)
class RegularParams:
    v: int
    omega: int
    K1: Optional[float]  # None marks the equilibrium branch
    K2: float

    @property
    def equilibrium(self) -> bool:
        return self.K1 is None


def _check_signs(v, omega):
    if v not in (1, -1) or omega not in (1, -1):
        raise ModelError(f"regular primitives need v, omega in {{-1, +1}}, got ({v}, {omega})")


def equilibrium_angle(v: int, omega: int) -> float:
    return v * omega * math.pi / 2


def regular_constants(beta0: float, lambda_beta0: float, v: int, omega: int) -> RegularParams:
    _check_signs(v, omega)
    K2 = lambda_beta0 * (omega - v * math.sin(beta0))
    if abs(wrap_angle(beta0 - equilibrium_angle(v, omega))) <= EQUILIBRIUM_TOL:
        return RegularParams(v, omega, None, 0.0 if lambda_beta0 == 0.0 else K2)
    K1 = 2.0 / (v - omega * math.tan(beta0 / 2))
    return RegularParams(v, omega, K1, K2)


def _half_angle_track(beta0: float, v: int, omega: int, dt):
    """Return (phi0, phi(dt), cot0, cot(dt)) for half the offset from equilibrium."""
    gamma0 = wrap_angle(beta0 - equilibrium_angle(v, omega))
    half = 0.5 * gamma0
    cot0 = math.cos(half) / math.sin(half)
    cot_t = cot0 - omega * np.asarray(dt, dtype=float)
    shift = 0.0 if half > 0 else math.pi
    phi0 = math.atan2(1.0, cot0) - shift
    phi_t = np.arctan2(1.0, cot_t) - shift
    return phi0, phi_t, cot0, cot_t


def beta_regular(beta0: float, v: int, omega: int, dt):
    """Trailer angle after ``dt`` on a regular primitive (continuous branch)."""
    _check_signs(v, omega)
    if abs(wrap_angle(beta0 - equilibrium_angle(v, omega))) <= EQUILIBRIUM_TOL:
        return beta0 + 0.0 * np.asarray(dt, dtype=float)
    phi0, phi_t, _, _ = _half_angle_track(beta0, v, omega, dt)
    return beta0 + 2.0 * (phi_t - phi0)


def beta_textbook(beta0: float, v: int, omega: int, dt):
    """``2 (v/w) arctan((t - 2v + K1) / (t + K1))``; only piecewise continuous."""
    K1 = regular_constants(beta0, 0.0, v, omega).K1
    dt = np.asarray(dt, dtype=float)
    return 2.0 * (v / omega) * np.arctan((dt - 2 * v + K1) / (dt + K1))


def lambda_beta_regular(beta0: float, lambda_beta0: float, v: int, omega: int, dt):
    """``K2 / (w - v sin beta)`` evaluated as a ratio of squared sines."""
    _check_signs(v, omega)
    dt = np.asarray(dt, dtype=float)
    if lambda_beta0 == 0.0 or abs(wrap_angle(beta0 - equilibrium_angle(v, omega))) <= EQUILIBRIUM_TOL:
        return lambda_beta0 + 0.0 * dt
    _, _, cot0, cot_t = _half_angle_track(beta0, v, omega, dt)
    return lambda_beta0 * (1.0 + cot_t**2) / (1.0 + cot0**2)


def regular_arrays(q0: Configuration, lambda_beta0: float, v: int, omega: int, dt):
    """Vectorised closed form: returns (Q, lambda_beta) for every ``dt``."""
    dt = np.atleast_1d(np.asarray(dt, dtype=float))
    if np.any(dt < 0):
        raise ModelError("dt must be non-negative")
    r = v / omega
    theta = q0.theta + omega * dt
    x = q0.x + r * (np.sin(theta) - math.sin(q0.theta))
    y = q0.y - r * (np.cos(theta) - math.cos(q0.theta))
    beta = beta_regular(q0.beta, v, omega, dt)
    Q = np.stack([x, y, theta, beta * np.ones_like(dt)], axis=1)
    return Q, lambda_beta_regular(q0.beta, lambda_beta0, v, omega, dt) * np.ones_like(dt)


def propagate_regular(q0: Configuration, lambda_beta0: float, v: int, omega: int, dt: float):
    _check_signs(v, omega)
    if dt == 0.0:
        return q0, lambda_beta0
    Q, LB = regular_arrays(q0, lambda_beta0, v, omega, [dt])
    return Configuration.from_array(Q[0]), float(LB[0])


def regular_samples(
    q0: Configuration,
    lam0: AdjointState,
    v: int,
    omega: int,
    dt: float,
    h: float = 1e-3,
    t0: float = 0.0,
) -> Samples:
    """Dense closed-form samples of a regular primitive, including the adjoint."""
    _check_signs(v, omega)
    n = max(1, int(math.ceil(dt / h - 1e-9))) if dt > 0 else 0
    local = np.minimum(np.arange(n + 1) * h, dt)
    if n:
        local[-1] = dt
    Q, LB = regular_arrays(q0, lam0.lbeta, v, omega, local)
    lam = np.empty((local.size, 4))
    lam[:, 0] = lam0.lx
    lam[:, 1] = lam0.ly
    lam[:, 2] = lam0.ltheta + lam0.lx * (Q[:, 1] - q0.y) - lam0.ly * (Q[:, 0] - q0.x)
    lam[:, 3] = LB
    u = np.tile([float(v), float(omega)], (local.size, 1))
    return Samples(t0 + local, Q, lam, u)


def regular_segment(
    q0: Configuration,
    lam0: AdjointState,
    v: int,
    omega: int,
    dt: float,
    h: float = 1e-3,
    t0: float = 0.0,
    constants: Optional[ExtremalConstants] = None,
) -> Segment:
    return Segment(
        SegmentKind.regular(v, omega),
        regular_samples(q0, lam0, v, omega, dt, h, t0),
        constants=constants,
    )
