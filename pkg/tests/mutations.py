"""Seeded single-sample corruptions, one per necessary-condition check.

Each mutation targets a sample where the corresponding check is sensitive and
pushes it well past that check's tolerance.
"""

import numpy as np

from trailer_extremals import io
from trailer_extremals.composer import MergingCurve, Regular, Straight, run_script
from trailer_extremals.model import Configuration, SegmentKind, switching_arrays


def base_trajectory():
    """A composition touching every check: regular, merging, straight and departing arcs."""
    return run_script(Configuration(0, 0, 0, -0.5), [
        Regular(1, 1, 1.0), MergingCurve(-1), Straight(3), MergingCurve(1, mode="depart"),
    ])


def _copy(traj):
    return io.loads(io.dumps(traj))


def _pick(traj, rng, want=lambda seg: True, ok=lambda s, i: True):
    cands = [(k, i) for k, seg in enumerate(traj.segments) if want(seg)
             for i in range(1, len(seg.samples) - 1) if ok(seg.samples, i)]
    k, i = cands[int(rng.integers(len(cands)))]
    return traj.segments[k].samples, i


def _switching(s, i):
    pv, pw = switching_arrays(s.q[i:i + 1], s.lam[i:i + 1])
    return float(pv[0]), float(pw[0])


def _nontriviality(traj, rng):
    s, i = _pick(traj, rng)
    s.lam[i] = 0.0


def _lxy(traj, rng):
    s, i = _pick(traj, rng)
    s.lam[i, int(rng.integers(2))] += 1e-6


def _ltheta(traj, rng):
    s, i = _pick(traj, rng)
    s.lam[i, 2] += 1e-5


def _lbeta(traj, rng):
    s, i = _pick(traj, rng)
    s.lam[i, 3] += 1e-3 * max(1.0, abs(s.lam[i, 3]))


def _omega_flip(traj, rng):
    s, i = _pick(traj, rng, lambda seg: seg.kind.is_regular, lambda s, i: abs(_switching(s, i)[1]) > 1e-3)
    s.u[i, 1] = -s.u[i, 1]


def _maximization(traj, rng):
    s, i = _pick(traj, rng, ok=lambda s, i: max(map(abs, _switching(s, i))) > 1e-3)
    s.u[i] = -s.u[i]


def _switching_consistency(traj, rng):
    s, i = _pick(traj, rng, lambda seg: seg.kind.is_regular)
    s.u[i, 0] = 0.0


def _k2(traj, rng):
    s, i = _pick(traj, rng, lambda seg: seg.kind.is_regular,
                 lambda s, i: abs(s.u[i, 1] - s.u[i, 0] * np.sin(s.q[i, 3])) > 0.1)
    s.lam[i, 3] += 1e-5 * max(1.0, abs(s.lam[i, 3]))


def _e(traj, rng):
    s, i = _pick(traj, rng, lambda seg: seg.kind == SegmentKind.PHI_OMEGA_SINGULAR)
    s.lam[i, 2] += 1e-4


def _manifold(traj, rng):
    s, i = _pick(traj, rng, lambda seg: bool(seg.meta.get("merging")))
    s.q[i, 1] += 1e-4


MUTATIONS = {
    "nontriviality": _nontriviality,
    "lxy_constancy": _lxy,
    "ltheta_affine": _ltheta,
    "lbeta_quadrature": _lbeta,
    "hamiltonian": _omega_flip,
    "maximization": _maximization,
    "switching_consistency": _switching_consistency,
    "k2_invariance": _k2,
    "e_invariance": _e,
    "merging_manifold": _manifold,
}


def mutate(traj, check, rng):
    out = _copy(traj)
    MUTATIONS[check](out, rng)
    return out
