"""Deterministic SVG rendering of trajectories.

Regular segments are stroked blue and singular ones (including straight
motion) red; each distinct line on which lambda_theta vanishes is drawn dashed.
Robot/trailer glyphs are placed every ``glyph_interval`` time units. Output
depends only on the trajectory and the arguments, so identical inputs give
identical bytes.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .model import Line, Trajectory

REGULAR_COLOR = "#1f4fd8"
SINGULAR_COLOR = "#d62728"
LINE_COLOR = "#888888"
PATH_STEP = 0.02  # time between plotted path vertices


def _f(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def trailer_axle(x, y, theta, beta):
    """Trailer axle position for unit trailer length, hitched at the robot centre."""
    psi = theta - beta
    return x - np.cos(psi), y - np.sin(psi)


def _thin(t: np.ndarray) -> np.ndarray:
    keep = [0]
    for i in range(1, t.size - 1):
        if t[i] - t[keep[-1]] >= PATH_STEP:
            keep.append(i)
    if t.size > 1:
        keep.append(t.size - 1)
    return np.array(keep, dtype=int)


def _lines(traj: Trajectory) -> list[Line]:
    seen, out = set(), []
    for seg in traj.segments:
        c = traj.segment_constants(seg)
        l = c.line() if c is not None else None
        if l is None:
            continue
        n = l.normalized()
        # (c1, c2, c3) and its negation describe the same line
        sgn = 1.0 if (n.c1, n.c2) > (0.0, 0.0) else -1.0
        key = tuple(round(sgn * v, 6) for v in (n.c1, n.c2, n.c3))
        if key not in seen:
            seen.add(key)
            out.append(n)
    return out


def _clip_line(l: Line, box) -> Optional[tuple]:
    """Segment of l inside the axis-aligned box (x0, y0, x1, y1)."""
    x0, y0, x1, y1 = box
    # points p + s*(c1, c2) with p the foot of the perpendicular from the origin
    px, py = l.c2 * l.c3, -l.c1 * l.c3
    dx, dy = l.c1, l.c2
    lo, hi = -math.inf, math.inf
    for p, d, a, b in ((px, dx, x0, x1), (py, dy, y0, y1)):
        if abs(d) < 1e-15:
            if not a <= p <= b:
                return None
            continue
        s1, s2 = (a - p) / d, (b - p) / d
        lo, hi = max(lo, min(s1, s2)), min(hi, max(s1, s2))
    if lo >= hi:
        return None
    return (px + lo * dx, py + lo * dy, px + hi * dx, py + hi * dy)


def _glyph(x, y, theta, beta, scale) -> list[str]:
    ax, ay = trailer_axle(x, y, theta, beta)
    c, s = math.cos(theta), math.sin(theta)
    L, W = 0.35 * scale, 0.2 * scale
    corners = [(L, W), (L, -W), (-L, -W), (-L, W)]
    body = " ".join(f"{_f(x + c * u - s * w)},{_f(y + s * u + c * w)}" for u, w in corners)
    tip = (x + c * 1.6 * L, y + s * 1.6 * L)
    return [
        f'<line x1="{_f(x)}" y1="{_f(y)}" x2="{_f(ax)}" y2="{_f(ay)}" class="hitch"/>',
        f'<circle cx="{_f(ax)}" cy="{_f(ay)}" r="{_f(0.12 * scale)}" class="trailer"/>',
        f'<polygon points="{body}" class="robot"/>',
        f'<line x1="{_f(x)}" y1="{_f(y)}" x2="{_f(tip[0])}" y2="{_f(tip[1])}" class="heading"/>',
    ]


def render_svg(
    traj: Trajectory,
    glyph_interval: float = 1.0,
    width: int = 800,
    draw_lines: bool = True,
    title: Optional[str] = None,
) -> str:
    if not glyph_interval > 0:
        raise ValueError("glyph interval must be positive")
    if width <= 0:
        raise ValueError("width must be positive")
    pts = []
    for seg in traj.segments:
        q = seg.samples.q
        ax, ay = trailer_axle(q[:, 0], q[:, 1], q[:, 2], q[:, 3])
        pts.append(np.concatenate([q[:, :2], np.column_stack([ax, ay])]))
    if pts:
        allp = np.concatenate(pts)
        x0, y0 = allp.min(axis=0) - 1.0
        x1, y1 = allp.max(axis=0) + 1.0
    else:
        x0, y0, x1, y1 = -1.0, -1.0, 1.0, 1.0
    span = max(x1 - x0, y1 - y0)
    height = max(1, int(round(width * (y1 - y0) / (x1 - x0))))
    stroke = span / width * 2.0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{_f(x0)} {_f(-y1)} {_f(x1 - x0)} {_f(y1 - y0)}">',
        "<style>"
        f".regular{{fill:none;stroke:{REGULAR_COLOR};stroke-width:{_f(stroke)}}}"
        f".singular{{fill:none;stroke:{SINGULAR_COLOR};stroke-width:{_f(stroke)}}}"
        f".ell{{stroke:{LINE_COLOR};stroke-width:{_f(stroke * 0.6)};stroke-dasharray:{_f(stroke * 4)}}}"
        f".robot{{fill:none;stroke:#000;stroke-width:{_f(stroke * 0.5)}}}"
        f".heading,.hitch{{stroke:#000;stroke-width:{_f(stroke * 0.5)}}}"
        f".trailer{{fill:#555}}"
        "</style>",
    ]
    if title:
        out.append(f"<title>{title}</title>")
    out.append('<g transform="scale(1,-1)">')
    if draw_lines:
        for l in _lines(traj):
            seg = _clip_line(l, (x0, y0, x1, y1))
            if seg is not None:
                out.append(
                    f'<line x1="{_f(seg[0])}" y1="{_f(seg[1])}" x2="{_f(seg[2])}" y2="{_f(seg[3])}" class="ell"/>'
                )
    for seg in traj.segments:
        s = seg.samples
        idx = _thin(s.t)
        d = " ".join(f"{_f(s.q[i, 0])},{_f(s.q[i, 1])}" for i in idx)
        cls = "regular" if seg.kind.is_regular else "singular"
        out.append(f'<polyline points="{d}" class="{cls}" data-kind="{seg.kind.value}"/>')
    if traj.segments:
        allt = traj.all_samples()
        t_start = allt.t[0]
        k = 0
        scale = min(1.0, span / 20.0) if span > 0 else 1.0
        while True:
            tk = t_start + k * glyph_interval
            if tk > allt.t[-1] + 1e-12:
                break
            i = int(np.searchsorted(allt.t, tk - 1e-12))
            i = min(i, len(allt) - 1)
            out.extend(_glyph(*allt.q[i], scale=max(scale, 0.3)))
            k += 1
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(traj: Trajectory, path, **kwargs) -> None:
    with open(path, "w") as f:
        f.write(render_svg(traj, **kwargs))
