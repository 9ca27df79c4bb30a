"""Necessary-condition checks for sampled extremals.

Every check recomputes switching values and the Hamiltonian from the stored
state, adjoint and control columns, so a trajectory file is re-checkable
without the seed that produced it.

Adjoint identities are evaluated per *block*: a maximal run of segments whose
adjoint is continuous across the joints. Scripted compositions reseed the
adjoint at each explicit directive, and a merge touchdown snaps it, so each of
those starts a new block. Block constants are read off the first sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import Line, SegmentKind, Trajectory, switching_arrays, wrap_angles
from .singular import manifold_residuals

CORNERS = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1], [0, 0]], dtype=float)

CHECKS = (
    "nontriviality",
    "lxy_constancy",
    "ltheta_affine",
    "lbeta_quadrature",
    "hamiltonian",
    "maximization",
    "switching_consistency",
    "k2_invariance",
    "e_invariance",
    "merging_manifold",
)


@dataclass(frozen=True)
class ToleranceSet:
    algebraic: float = 1e-8
    quadrature: float = 1e-5
    hamiltonian: float = 1e-6
    h_max: float = 1e-9
    lxy: float = 1e-12
    manifold: float = 1e-6
    switch: float = 1e-9
    joint: float = 1e-9
    snap: float = 1e-5
    nontrivial: float = 1e-12
    max_step: float = 1e-2


@dataclass
class CheckResult:
    name: str
    max_residual: float
    tolerance: float
    applicable: bool = True
    worst_t: Optional[float] = None

    @property
    def passed(self) -> bool:
        return (not self.applicable) or self.max_residual <= self.tolerance

    @property
    def status(self) -> str:
        if not self.applicable:
            return "skipped"
        return "pass" if self.passed else "FAIL"


@dataclass
class PmpReport:
    checks: dict[str, CheckResult] = field(default_factory=dict)
    structural_errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.structural_errors and all(c.passed for c in self.checks.values())

    def failed(self) -> list[str]:
        return [n for n, c in self.checks.items() if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "structural_errors": list(self.structural_errors),
            "checks": {
                n: {
                    "status": c.status,
                    "max_residual": c.max_residual,
                    "tolerance": c.tolerance,
                    "worst_t": c.worst_t,
                }
                for n, c in self.checks.items()
            },
        }

    def summary(self) -> str:
        lines = []
        for e in self.structural_errors:
            lines.append(f"structural: {e}")
        for n, c in self.checks.items():
            lines.append(f"{n:<22} {c.status:<7} max={c.max_residual:.3e} tol={c.tolerance:.1e}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def structural_errors(traj: Trajectory, tol: ToleranceSet = ToleranceSet()) -> list[str]:
    errs = []
    prev = None
    for i, seg in enumerate(traj.segments):
        s = seg.samples
        if len(s) < 2:
            errs.append(f"segment {i} has fewer than 2 samples")
            continue
        if not (np.all(np.isfinite(s.q)) and np.all(np.isfinite(s.lam)) and np.all(np.isfinite(s.u))):
            errs.append(f"segment {i} has non-finite values")
            continue
        dt = np.diff(s.t)
        if not np.all(dt > 0):
            errs.append(f"segment {i}: time not strictly increasing")
        elif dt.max() > tol.max_step + 1e-15:
            errs.append(f"segment {i}: sample step {dt.max():.3g} exceeds {tol.max_step}")
        if np.any(np.abs(s.u) > 1.0 + 1e-12):
            errs.append(f"segment {i}: control outside U")
        if prev is not None:
            if abs(s.t[0] - prev.t[-1]) > 1e-12:
                errs.append(f"joint {i}: time gap {s.t[0] - prev.t[-1]:.3g}")
            dq = np.abs(s.q[0] - prev.q[-1])
            dq[2:] = np.abs(wrap_angles(s.q[0, 2:] - prev.q[-1, 2:]))
            # a recorded merge/depart snap may move the state by O(eps_merge)
            allowed = tol.snap if "snap" in seg.meta else tol.joint
            if dq.max() > allowed:
                errs.append(f"joint {i}: configuration jump {dq.max():.3g}")
        prev = s
    return errs


def _blocks(traj: Trajectory, tol: ToleranceSet) -> list[list[int]]:
    blocks: list[list[int]] = []
    for i, seg in enumerate(traj.segments):
        if blocks:
            prev = traj.segments[i - 1].samples
            jump = np.max(np.abs(seg.samples.lam[0] - prev.lam[-1]))
            if jump <= tol.joint * max(1.0, np.max(np.abs(prev.lam[-1]))):
                blocks[-1].append(i)
                continue
        blocks.append([i])
    return blocks


def _series(traj: Trajectory, name: str, tol: ToleranceSet):
    """Per-segment (t, residual) arrays for one check; segments that do not apply are omitted."""
    out = []
    if name in ("nontriviality", "lxy_constancy", "ltheta_affine", "lbeta_quadrature", "hamiltonian"):
        for block in _blocks(traj, tol):
            s0 = traj.segments[block[0]].samples
            q0, l0 = s0.q[0], s0.lam[0]
            c1, c2 = l0[0], l0[1]
            c3 = l0[2] - c1 * q0[1] + c2 * q0[0]
            H0 = None
            expo = 0.0
            for i in block:
                s = traj.segments[i].samples
                if name == "nontriviality":
                    r = np.maximum(0.0, tol.nontrivial - np.max(np.abs(s.lam), axis=1))
                elif name == "lxy_constancy":
                    r = np.max(np.abs(s.lam[:, :2] - l0[:2]), axis=1)
                elif name == "ltheta_affine":
                    scale = max(1.0, abs(c1), abs(c2), abs(c3))
                    r = np.abs(s.lam[:, 2] - (c1 * s.q[:, 1] - c2 * s.q[:, 0] + c3)) / scale
                elif name == "lbeta_quadrature":
                    f = s.u[:, 0] * np.cos(s.q[:, 3])
                    inc = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(s.t))])
                    e = expo + inc
                    with np.errstate(over="ignore"):
                        quad = l0[3] * np.exp(np.minimum(e, 700.0))
                    r = np.abs(s.lam[:, 3] - quad) / np.maximum(1.0, np.abs(quad))
                    expo = e[-1]
                else:
                    pv, pw = switching_arrays(s.q, s.lam)
                    H = pv * s.u[:, 0] + pw * s.u[:, 1]
                    if H0 is None:
                        H0 = H[0]
                    r = np.abs(H - H0)
                out.append((s.t, r))
        return out
    for seg in traj.segments:
        s = seg.samples
        pv, pw = switching_arrays(s.q, s.lam)
        v, w = s.u[:, 0], s.u[:, 1]
        if name == "maximization":
            Hmax = np.max(pv[:, None] * CORNERS[None, :, 0] + pw[:, None] * CORNERS[None, :, 1], axis=1)
            out.append((s.t, np.maximum(0.0, Hmax - (pv * v + pw * w))))
        elif name == "switching_consistency":
            # bang rule where a switching function is clearly nonzero; a singular kind
            # instead claims its function vanishes, judged at the algebraic tolerance
            # and rescaled onto this check's units
            r = np.zeros_like(s.t)
            singular_w = seg.kind in (SegmentKind.PHI_OMEGA_SINGULAR, SegmentKind.STRAIGHT)
            singular_v = seg.kind == SegmentKind.PHI_V_SINGULAR
            if singular_v:
                r = np.abs(pv) / tol.algebraic * tol.switch
            else:
                m = np.abs(pv) > tol.switch
                r[m] = np.abs(v[m] - np.sign(pv[m]))
            if singular_w:
                r = np.maximum(r, np.abs(pw) / tol.algebraic * tol.switch)
            else:
                m = np.abs(pw) > tol.switch
                r[m] = np.maximum(r[m], np.abs(w[m] - np.sign(pw[m])))
            if seg.kind.is_regular:
                sv, sw = seg.kind.signs
                r = np.maximum(r, np.maximum(np.abs(v - sv), np.abs(w - sw)))
            out.append((s.t, r))
        elif name == "k2_invariance" and seg.kind.is_regular:
            K2 = s.lam[:, 3] * (w - v * np.sin(s.q[:, 3]))
            out.append((s.t, np.abs(K2 - K2[0]) / max(1.0, abs(K2[0]))))
        elif name == "e_invariance" and seg.kind in (SegmentKind.PHI_OMEGA_SINGULAR, SegmentKind.STRAIGHT):
            lt = s.lam[:, 2]
            E = 0.5 * lt**2 - pv * lt * np.sin(s.q[:, 3])
            out.append((s.t, np.abs(E - E[0]) / max(1.0, abs(E[0]))))
        elif name == "merging_manifold" and seg.meta.get("merging"):
            sigma, vm = int(seg.meta["sigma"]), int(seg.meta["v"])
            l0 = s.lam[0]
            line = Line(l0[0], l0[1], l0[2] - l0[0] * s.q[0, 1] + l0[1] * s.q[0, 0])
            r_d, r_a = manifold_residuals(line, sigma, vm, s.q)
            r_w = np.maximum(0.0, np.abs(w) - 1.0 - 1e-12) / 1e-12 * tol.manifold
            r_b = np.maximum(0.0, np.abs(np.sin(s.q[:, 3])) - 0.5 - 1e-9) / 1e-9 * tol.manifold
            out.append((s.t, np.max(np.stack([r_d, r_a, r_w, r_b]), axis=0)))
    return out


def _tolerance(name: str, tol: ToleranceSet) -> float:
    return {
        "nontriviality": 0.0,
        "lxy_constancy": tol.lxy,
        "ltheta_affine": tol.algebraic,
        "lbeta_quadrature": tol.quadrature,
        "hamiltonian": tol.hamiltonian,
        "maximization": tol.h_max,
        "switching_consistency": tol.switch,
        "k2_invariance": tol.algebraic,
        "e_invariance": tol.algebraic,
        "merging_manifold": tol.manifold,
    }[name]


def residual_series(traj: Trajectory, check: str, tol: ToleranceSet = ToleranceSet()):
    """Dense (t, residual) list for one check; empty when the check does not apply."""
    if check not in CHECKS:
        raise ValueError(f"unknown check {check!r}; expected one of {', '.join(CHECKS)}")
    pts = []
    for t, r in _series(traj, check, tol):
        pts.extend(zip(t.tolist(), r.tolist()))
    return pts


def check_pmp(traj: Trajectory, tol: ToleranceSet = ToleranceSet()) -> PmpReport:
    report = PmpReport(structural_errors=structural_errors(traj, tol))
    if report.structural_errors:
        return report
    for name in CHECKS:
        parts = _series(traj, name, tol)
        if not parts:
            report.checks[name] = CheckResult(name, 0.0, _tolerance(name, tol), applicable=False)
            continue
        t = np.concatenate([p[0] for p in parts])
        r = np.concatenate([p[1] for p in parts])
        k = int(np.argmax(r))
        report.checks[name] = CheckResult(name, float(r[k]), _tolerance(name, tol), worst_t=float(t[k]))
    return report
