"""System and adjoint right-hand sides, Hamiltonian, switching functions and a
fixed-step RK4 integrator used as the numerical oracle for the closed forms.

Control laws are plain callables ``law(t, q, lam) -> (v, omega)`` where ``q``
and ``lam`` are 4-tuples of floats. They are evaluated at every RK4 stage with
the stage state.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Sequence

import numba
import numpy as np

from .model import (
    AdjointState,
    Configuration,
    Control,
    ExtremalConstants,
    Samples,
    SwitchingValues,
)

log = logging.getLogger(__name__)

ControlLaw = Callable[[float, tuple, tuple], tuple]

DEFAULT_H = 1e-3
EVENT_TIME_TOL = 1e-12
EXPONENT_CAP = 700.0


class IntegrationError(RuntimeError):
    pass


def system_derivative(q: Configuration, u: Control) -> tuple[float, float, float, float]:
    v, w = u.v, u.omega
    return (v * math.cos(q.theta), v * math.sin(q.theta), w, -v * math.sin(q.beta) + w)


def adjoint_derivative(q: Configuration, lam: AdjointState, u: Control) -> tuple[float, float, float, float]:
    v = u.v
    return (
        0.0,
        0.0,
        v * (lam.lx * math.sin(q.theta) - lam.ly * math.cos(q.theta)),
        v * lam.lbeta * math.cos(q.beta),
    )


def switching(q: Configuration, lam: AdjointState) -> SwitchingValues:
    phi_v = lam.lx * math.cos(q.theta) + lam.ly * math.sin(q.theta) - lam.lbeta * math.sin(q.beta)
    return SwitchingValues(phi_v, lam.ltheta + lam.lbeta)


def hamiltonian(q: Configuration, lam: AdjointState, u: Control) -> float:
    sw = switching(q, lam)
    return u.v * sw.phi_v + u.omega * sw.phi_omega


def lambda_theta_affine(c: ExtremalConstants, x, y):
    return c.c1 * y - c.c2 * x + c.c3


def _rhs(z, v, w):
    x, y, th, be, lx, ly, lt, lb = z
    s, co = math.sin(th), math.cos(th)
    return (
        v * co,
        v * s,
        w,
        -v * math.sin(be) + w,
        0.0,
        0.0,
        v * (lx * s - ly * co),
        v * lb * math.cos(be),
    )


def _rk4_step(law, t, z, h):
    q, l = z[:4], z[4:]
    v, w = law(t, q, l)
    k1 = _rhs(z, v, w)
    z2 = tuple(a + 0.5 * h * b for a, b in zip(z, k1))
    v, w = law(t + 0.5 * h, z2[:4], z2[4:])
    k2 = _rhs(z2, v, w)
    z3 = tuple(a + 0.5 * h * b for a, b in zip(z, k2))
    v, w = law(t + 0.5 * h, z3[:4], z3[4:])
    k3 = _rhs(z3, v, w)
    z4 = tuple(a + h * b for a, b in zip(z, k3))
    v, w = law(t + h, z4[:4], z4[4:])
    k4 = _rhs(z4, v, w)
    out = tuple(a + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for a, b1, b2, b3, b4 in zip(z, k1, k2, k3, k4))
    # lambda_x and lambda_y have zero derivative; keep them bit-exact
    return out[:4] + (z[4], z[5]) + out[6:]


def integrate_until(
    q0: Configuration,
    lam0: AdjointState,
    law: ControlLaw,
    T: float,
    h: float = DEFAULT_H,
    events: Optional[dict[str, Callable[[float, tuple], float]]] = None,
    direction: int = 1,
    t0: float = 0.0,
) -> tuple[Samples, str]:
    """RK4 integration of the joint (q, lambda) system with event handling.

    Each event is a scalar function ``g(t, z)`` of the 8-vector ``z``; it fires
    when ``g`` becomes non-positive. The crossing is bracketed by bisection on
    the sub-step length down to ``EVENT_TIME_TOL`` and the last sample is the
    state just before the crossing. ``direction=-1`` integrates backwards in
    time. Returns the samples (times increasing in the integration direction)
    and the exit reason, ``"duration"`` or an event name.
    """
    if not T > 0.0 or not h > 0.0:
        raise ValueError("need T > 0 and h > 0")
    h = min(h, T)
    events = events or {}
    z = tuple(q0.as_array()) + tuple(lam0.as_array())
    t = t0
    ts = [t]
    zs = [z]
    for name, g in events.items():
        if g(t, z) <= 0.0:
            return _pack(ts, zs, law), name
    n_full = int(math.floor(T / h + 1e-9))
    steps = [h] * n_full
    rem = T - n_full * h
    if rem > 1e-13 * max(1.0, T):
        steps.append(rem)
    elapsed = 0.0
    for k, hk in enumerate(steps):
        zn = _rk4_step(law, t, z, direction * hk)
        elapsed = T if k == len(steps) - 1 else elapsed + hk
        tn = t0 + direction * elapsed
        if not all(math.isfinite(a) for a in zn):
            raise IntegrationError(f"non-finite state at t={tn}: {zn}")
        fired = [name for name, g in events.items() if g(tn, zn) <= 0.0]
        if fired:
            lo, hi = 0.0, hk
            name = fired[0]
            while hi - lo > EVENT_TIME_TOL:
                mid = 0.5 * (lo + hi)
                zm = _rk4_step(law, t, z, direction * mid)
                first = next((nm for nm, g in events.items() if g(t + direction * mid, zm) <= 0.0), None)
                if first is None:
                    lo = mid
                else:
                    hi, name = mid, first
            if lo > 0.0:
                ts.append(t + direction * lo)
                zs.append(_rk4_step(law, t, z, direction * lo))
            return _pack(ts, zs, law), name
        t, z = tn, zn
        ts.append(t)
        zs.append(z)
    return _pack(ts, zs, law), "duration"


def _pack(ts, zs, law) -> Samples:
    arr = np.array(zs, dtype=float)
    u = np.array([law(t, z[:4], z[4:]) for t, z in zip(ts, zs)], dtype=float)
    return Samples(np.array(ts), arr[:, :4], arr[:, 4:], u)


def integrate_numeric(
    q0: Configuration,
    lam0: AdjointState,
    law: ControlLaw,
    T: float,
    h: float = DEFAULT_H,
) -> Samples:
    """Fixed-step RK4 of the 8-dimensional (q, lambda) system.

    One sample per step; the final step is shortened so that the last sample
    lands exactly on ``T``.
    """
    samples, _ = integrate_until(q0, lam0, law, T, h)
    return samples


def constant_law(v: float, omega: float) -> ControlLaw:
    def law(t, q, lam):
        return (v, omega)

    return law


@numba.njit(cache=True)
def _batch_kernel(Z, U, T, h):
    n = Z.shape[0]
    k = np.empty((4, 8))
    zt = np.empty(8)
    for i in range(n):
        v, w = U[i, 0], U[i, 1]
        elapsed = 0.0
        while T[i] - elapsed > 1e-13:
            hk = min(h, T[i] - elapsed)
            for s in range(4):
                if s == 0:
                    for j in range(8):
                        zt[j] = Z[i, j]
                else:
                    a = hk if s == 3 else 0.5 * hk
                    for j in range(8):
                        zt[j] = Z[i, j] + a * k[s - 1, j]
                sn, cs = math.sin(zt[2]), math.cos(zt[2])
                k[s, 0] = v * cs
                k[s, 1] = v * sn
                k[s, 2] = w
                k[s, 3] = -v * math.sin(zt[3]) + w
                k[s, 4] = 0.0
                k[s, 5] = 0.0
                k[s, 6] = v * (zt[4] * sn - zt[5] * cs)
                k[s, 7] = v * zt[7] * math.cos(zt[3])
            for j in range(8):
                Z[i, j] += (hk / 6.0) * (k[0, j] + 2.0 * k[1, j] + 2.0 * k[2, j] + k[3, j])
            elapsed += hk
    return Z


def integrate_batch(
    Q0: np.ndarray,
    L0: np.ndarray,
    U: np.ndarray,
    T: np.ndarray,
    h: float,
) -> tuple[np.ndarray, np.ndarray]:
    """RK4 for many runs with constant controls, compiled with numba.

    Row ``i`` integrates from ``(Q0[i], L0[i])`` under ``U[i]`` for ``T[i]``
    with step ``h`` and a shortened final step. Returns the final ``(Q, L)``.
    """
    Z = np.ascontiguousarray(np.concatenate([np.asarray(Q0, float), np.asarray(L0, float)], axis=1))
    Z = _batch_kernel(Z, np.ascontiguousarray(U, dtype=float), np.ascontiguousarray(T, dtype=float), float(h))
    return Z[:, :4], Z[:, 4:]


def lambda_beta_quadrature(samples: Samples, c4: float) -> np.ndarray:
    """lambda_beta = c4 * exp(integral of v cos(beta)) by the trapezoid rule."""
    if c4 == 0.0:
        return np.zeros(len(samples))
    f = samples.u[:, 0] * np.cos(samples.q[:, 3])
    dt = np.diff(samples.t)
    expo = np.concatenate([[0.0], np.cumsum(0.5 * dt * (f[1:] + f[:-1]))])
    if np.any(np.abs(expo) > EXPONENT_CAP):
        log.warning("lambda_beta exponent exceeds %g; capping", EXPONENT_CAP)
        expo = np.clip(expo, -EXPONENT_CAP, EXPONENT_CAP)
    return c4 * np.exp(expo)


def _bang_signs(z, probe: float):
    """Controls consistent with the switching signs just after state ``z``.

    Where a switching function is (numerically) zero the sign is taken from a
    short probe step, so a transversal zero crossing picks the post-switch
    control. Returns None when no corner control is self-consistent.
    """

    def sw(z):
        phi_v = z[4] * math.cos(z[2]) + z[5] * math.sin(z[2]) - z[7] * math.sin(z[3])
        return phi_v, z[6] + z[7]

    pv, pw = sw(z)
    if abs(pv) > 1e-9 and abs(pw) > 1e-9:
        return (math.copysign(1.0, pv), math.copysign(1.0, pw))
    for v in (1.0, -1.0):
        for w in (1.0, -1.0):
            zp = _rk4_step(constant_law(v, w), 0.0, z, probe)
            a, b = sw(zp)
            if a * v > 0 and b * w > 0:
                return (v, w)
    return None


def integrate_bang_bang(
    q0: Configuration,
    lam0: AdjointState,
    T: float,
    h: float = DEFAULT_H,
    max_switches: int = 1000,
) -> tuple[Samples, list[float]]:
    """Oracle for regular extremals: RK4 under bang controls with switch location.

    Controls are the signs of the switching functions computed from the
    integrated state. When a step ends with a switching function of the wrong
    sign the crossing is located by bisection on the step length, the run is
    restarted from the crossing, and the switch time is recorded.
    """
    z = tuple(q0.as_array()) + tuple(lam0.as_array())
    t = 0.0
    parts = []
    switches = []
    while t < T - 1e-13 and len(switches) <= max_switches:
        signs = _bang_signs(z, probe=1e-6)
        if signs is None:
            raise IntegrationError(f"no consistent bang control at t={t}")
        law = constant_law(*signs)

        def crossed(zz, signs=signs):
            pv = zz[4] * math.cos(zz[2]) + zz[5] * math.sin(zz[2]) - zz[7] * math.sin(zz[3])
            pw = zz[6] + zz[7]
            return pv * signs[0] < 0.0 or pw * signs[1] < 0.0

        ts, zs = [t], [z]
        switched = False
        while t < T - 1e-13:
            hk = min(h, T - t)
            zn = _rk4_step(law, t, z, hk)
            if crossed(zn):
                lo, hi = 0.0, hk
                while hi - lo > EVENT_TIME_TOL:
                    mid = 0.5 * (lo + hi)
                    if crossed(_rk4_step(law, t, z, mid)):
                        hi = mid
                    else:
                        lo = mid
                zn = _rk4_step(law, t, z, hi)
                t = t + hi
                z = zn
                ts.append(t)
                zs.append(z)
                switches.append(t)
                switched = True
                break
            t = T if hk == T - t else t + hk
            z = zn
            ts.append(t)
            zs.append(z)
        parts.append(_pack(ts, zs, law))
        if not switched:
            break
    return Samples.concat(parts), switches


def as_state(q: Sequence[float]) -> Configuration:
    return Configuration(*map(float, q))
