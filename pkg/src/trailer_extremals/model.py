"""Domain types for the car-with-one-trailer extremal toolkit.

Units are nondimensional: the trailer length and the hitch offset are both 1,
so positions are measured in trailer lengths and the controls live in the
unit square ``[-1, 1]^2``.

Symbols map to fields as follows::

    x, y, theta, beta            -> Configuration
    v, omega                     -> Control
    lambda_x ... lambda_beta     -> AdjointState (lx, ly, ltheta, lbeta)
    c1 .. c4                     -> ExtremalConstants
    phi_v, phi_omega             -> SwitchingValues
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

import numpy as np

CONFIG_ATOL = 1e-9


class ModelError(ValueError):
    """Raised when a value violates a domain-type invariant."""


def wrap_angle(a: float) -> float:
    """Wrap ``a`` into the half-open interval (-pi, pi]."""
    return math.pi - ((math.pi - a) % (2.0 * math.pi))


def wrap_angles(a) -> np.ndarray:
    return math.pi - np.mod(math.pi - np.asarray(a, dtype=float), 2.0 * math.pi)


@dataclass(frozen=True)
class Configuration:
    x: float
    y: float
    theta: float
    beta: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta, self.beta)):
            raise ModelError(f"non-finite configuration {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta, self.beta])

    @classmethod
    def from_array(cls, a) -> "Configuration":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def close_to(self, other: "Configuration", atol: float = CONFIG_ATOL) -> bool:
        """Componentwise comparison with angles compared after wrapping."""
        return (
            abs(self.x - other.x) <= atol
            and abs(self.y - other.y) <= atol
            and abs(wrap_angle(self.theta - other.theta)) <= atol
            and abs(wrap_angle(self.beta - other.beta)) <= atol
        )


@dataclass(frozen=True)
class Control:
    v: float
    omega: float

    def __post_init__(self):
        if not (abs(self.v) <= 1.0 and abs(self.omega) <= 1.0):
            raise ModelError(f"control {self} outside U = [-1, 1]^2")


@dataclass(frozen=True)
class AdjointState:
    lx: float
    ly: float
    ltheta: float
    lbeta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.lx, self.ly, self.ltheta, self.lbeta])

    @classmethod
    def from_array(cls, a) -> "AdjointState":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def is_trivial(self) -> bool:
        return self.lx == 0.0 and self.ly == 0.0 and self.ltheta == 0.0 and self.lbeta == 0.0


@dataclass(frozen=True)
class ExtremalConstants:
    c1: float
    c2: float
    c3: float
    c4: float

    def __post_init__(self):
        if self.c1 == 0.0 and self.c2 == 0.0 and self.c3 == 0.0 and self.c4 == 0.0:
            raise ModelError("extremal constants must not all vanish")

    @classmethod
    def from_initial(cls, q0: Configuration, lam0: AdjointState) -> "ExtremalConstants":
        c1, c2 = lam0.lx, lam0.ly
        c3 = lam0.ltheta - c1 * q0.y + c2 * q0.x
        return cls(c1, c2, c3, lam0.lbeta)

    def line(self) -> Optional["Line"]:
        """The line on which lambda_theta vanishes, or None if (c1, c2) = 0."""
        if self.c1 == 0.0 and self.c2 == 0.0:
            return None
        return Line(self.c1, self.c2, self.c3)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c1, self.c2, self.c3, self.c4)


@dataclass(frozen=True)
class SwitchingValues:
    phi_v: float
    phi_omega: float


class SegmentKind(str, enum.Enum):
    REGULAR_FL = "RegularFL"
    REGULAR_FR = "RegularFR"
    REGULAR_BL = "RegularBL"
    REGULAR_BR = "RegularBR"
    PHI_V_SINGULAR = "PhiVSingular"
    PHI_OMEGA_SINGULAR = "PhiOmegaSingular"
    STRAIGHT = "Straight"

    @classmethod
    def regular(cls, v: float, omega: float) -> "SegmentKind":
        return {
            (1, 1): cls.REGULAR_FL,
            (1, -1): cls.REGULAR_FR,
            (-1, 1): cls.REGULAR_BL,
            (-1, -1): cls.REGULAR_BR,
        }[(int(math.copysign(1, v)), int(math.copysign(1, omega)))]

    @property
    def is_regular(self) -> bool:
        return self.value.startswith("Regular")

    @property
    def signs(self) -> tuple[int, int]:
        """(v, omega) sign pair of a regular kind."""
        return {
            "RegularFL": (1, 1),
            "RegularFR": (1, -1),
            "RegularBL": (-1, 1),
            "RegularBR": (-1, -1),
        }[self.value]


@dataclass(frozen=True)
class Line:
    """The line ``c1*y - c2*x + c3 = 0``."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if self.c1 == 0.0 and self.c2 == 0.0:
            raise ModelError("degenerate line: (c1, c2) = (0, 0)")

    @property
    def norm(self) -> float:
        return math.hypot(self.c1, self.c2)

    @property
    def direction(self) -> float:
        """Angle of the direction vector (c1, c2)."""
        return math.atan2(self.c2, self.c1)

    def normalized(self) -> "Line":
        n = self.norm
        return Line(self.c1 / n, self.c2 / n, self.c3 / n)


def signed_distance(l: Line, x, y):
    """Signed distance from (x, y) to ``l``; positive to the left of (c1, c2)."""
    return (l.c1 * y - l.c2 * x + l.c3) / l.norm


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    q: Configuration
    lam: AdjointState
    u: Control
    sw: SwitchingValues
    H: float


def switching_arrays(q: np.ndarray, lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    phi_v = lam[:, 0] * np.cos(q[:, 2]) + lam[:, 1] * np.sin(q[:, 2]) - lam[:, 3] * np.sin(q[:, 3])
    phi_w = lam[:, 2] + lam[:, 3]
    return phi_v, phi_w


@dataclass
class Samples:
    """Dense samples stored column-wise.

    ``q`` and ``lam`` have shape (n, 4), ``u`` has shape (n, 2). Switching
    values and the Hamiltonian are recomputed on construction unless given.
    """

    t: np.ndarray
    q: np.ndarray
    lam: np.ndarray
    u: np.ndarray
    phi_v: np.ndarray = None
    phi_omega: np.ndarray = None
    H: np.ndarray = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        n = self.t.size
        self.q = np.asarray(self.q, dtype=float).reshape(n, 4)
        self.lam = np.asarray(self.lam, dtype=float).reshape(n, 4)
        self.u = np.asarray(self.u, dtype=float).reshape(n, 2)
        if self.phi_v is None or self.phi_omega is None:
            self.phi_v, self.phi_omega = switching_arrays(self.q, self.lam)
        if self.H is None:
            self.H = self.phi_v * self.u[:, 0] + self.phi_omega * self.u[:, 1]
        self.phi_v = np.asarray(self.phi_v, dtype=float)
        self.phi_omega = np.asarray(self.phi_omega, dtype=float)
        self.H = np.asarray(self.H, dtype=float)

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, i: int) -> TrajectorySample:
        return TrajectorySample(
            t=float(self.t[i]),
            q=Configuration.from_array(self.q[i]),
            lam=AdjointState.from_array(self.lam[i]),
            u=Control(float(self.u[i, 0]), float(self.u[i, 1])),
            sw=SwitchingValues(float(self.phi_v[i]), float(self.phi_omega[i])),
            H=float(self.H[i]),
        )

    def __iter__(self) -> Iterator[TrajectorySample]:
        for i in range(len(self)):
            yield self[i]

    def copy(self) -> "Samples":
        return Samples(
            self.t.copy(), self.q.copy(), self.lam.copy(), self.u.copy(),
            self.phi_v.copy(), self.phi_omega.copy(), self.H.copy(),
        )

    def shifted(self, dt: float) -> "Samples":
        out = self.copy()
        out.t = out.t + dt
        return out

    def final_q(self) -> Configuration:
        return Configuration.from_array(self.q[-1])

    def final_lam(self) -> AdjointState:
        return AdjointState.from_array(self.lam[-1])

    @classmethod
    def concat(cls, parts: list["Samples"]) -> "Samples":
        return cls(
            np.concatenate([p.t for p in parts]),
            np.concatenate([p.q for p in parts]),
            np.concatenate([p.lam for p in parts]),
            np.concatenate([p.u for p in parts]),
            np.concatenate([p.phi_v for p in parts]),
            np.concatenate([p.phi_omega for p in parts]),
            np.concatenate([p.H for p in parts]),
        )


@dataclass
class Segment:
    kind: SegmentKind
    samples: Samples
    exit_reason: str = "duration"
    constants: Optional[ExtremalConstants] = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        t = self.samples.t
        if t.size < 1:
            raise ModelError("segment needs at least one sample")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ModelError("segment sample times must be strictly increasing")

    @property
    def t_start(self) -> float:
        return float(self.samples.t[0])

    @property
    def t_end(self) -> float:
        return float(self.samples.t[-1])

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass
class Trajectory:
    constants: Optional[ExtremalConstants]
    segments: list[Segment] = field(default_factory=list)
    truncated: bool = False

    @property
    def duration(self) -> float:
        if not self.segments:
            return 0.0
        return self.segments[-1].t_end - self.segments[0].t_start

    def segment_constants(self, seg: Segment) -> Optional[ExtremalConstants]:
        return seg.constants if seg.constants is not None else self.constants

    def all_samples(self) -> Samples:
        return Samples.concat([s.samples for s in self.segments])

    def final_q(self) -> Configuration:
        return self.segments[-1].samples.final_q()

    def switch_times(self) -> list[float]:
        return [s.t_end for s in self.segments[:-1]]
