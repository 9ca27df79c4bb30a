"""Trajectory files: canonical JSON and flat CSV export.

Floats are written with 17 significant digits, which round-trips every double
exactly, so write -> read -> write is byte-identical.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np

from .model import ExtremalConstants, ModelError, Samples, Segment, SegmentKind, Trajectory

FORMAT_VERSION = "1"
SAMPLE_FIELDS = ("t", "x", "y", "theta", "beta", "lx", "ly", "ltheta", "lbeta", "v", "omega", "phi_v", "phi_omega", "H")
CSV_COLUMNS = ("t", "x", "y", "theta", "beta", "v", "omega", "lx", "ly", "ltheta", "lbeta", "phi_v", "phi_omega", "H")


class TrajectoryFileError(ValueError):
    pass


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise TrajectoryFileError(f"cannot serialize non-finite value {x}")
    return format(x, ".17g")


def _encode(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v) for v in obj) + "]"
        inner = ",\n".join(pad + "  " + _encode(v, indent + 1) for v in obj)
        return "[\n" + inner + "\n" + pad + "]" if obj else "[]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(f"{pad}  {json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    raise TrajectoryFileError(f"cannot serialize {type(obj).__name__}")


def _constants(c):
    return None if c is None else [c.c1, c.c2, c.c3, c.c4]


def trajectory_to_dict(traj: Trajectory) -> dict:
    segs = []
    for seg in traj.segments:
        s = seg.samples
        cols = {
            "t": s.t, "x": s.q[:, 0], "y": s.q[:, 1], "theta": s.q[:, 2], "beta": s.q[:, 3],
            "lx": s.lam[:, 0], "ly": s.lam[:, 1], "ltheta": s.lam[:, 2], "lbeta": s.lam[:, 3],
            "v": s.u[:, 0], "omega": s.u[:, 1], "phi_v": s.phi_v, "phi_omega": s.phi_omega, "H": s.H,
        }
        segs.append({
            "kind": seg.kind.value,
            "t_start": seg.t_start,
            "t_end": seg.t_end,
            "exit_reason": seg.exit_reason,
            "constants": _constants(seg.constants),
            "meta": {k: seg.meta[k] for k in sorted(seg.meta)},
            "samples": {f: cols[f] for f in SAMPLE_FIELDS},
        })
    return {
        "format_version": FORMAT_VERSION,
        "constants": _constants(traj.constants),
        "truncated": bool(traj.truncated),
        "segments": segs,
    }


def dumps(traj: Trajectory) -> str:
    return _encode(trajectory_to_dict(traj)) + "\n"


def _read_constants(c):
    if c is None:
        return None
    if not (isinstance(c, list) and len(c) == 4):
        raise TrajectoryFileError("constants must be a list of four numbers")
    return ExtremalConstants(*map(float, c))


def trajectory_from_dict(d: dict) -> Trajectory:
    try:
        if d.get("format_version") != FORMAT_VERSION:
            raise TrajectoryFileError(f"unsupported format_version {d.get('format_version')!r}")
        traj = Trajectory(_read_constants(d["constants"]), truncated=bool(d.get("truncated", False)))
        for i, sd in enumerate(d["segments"]):
            cols = sd["samples"]
            missing = [f for f in SAMPLE_FIELDS if f not in cols]
            if missing:
                raise TrajectoryFileError(f"segment {i}: missing sample fields {missing}")
            a = {f: np.asarray(cols[f], dtype=float) for f in SAMPLE_FIELDS}
            n = a["t"].size
            if any(v.shape != (n,) for v in a.values()):
                raise TrajectoryFileError(f"segment {i}: sample columns differ in length")
            samples = Samples(
                a["t"],
                np.stack([a["x"], a["y"], a["theta"], a["beta"]], axis=1),
                np.stack([a["lx"], a["ly"], a["ltheta"], a["lbeta"]], axis=1),
                np.stack([a["v"], a["omega"]], axis=1),
                a["phi_v"], a["phi_omega"], a["H"],
            )
            traj.segments.append(Segment(
                SegmentKind(sd["kind"]), samples, sd.get("exit_reason", "duration"),
                _read_constants(sd.get("constants")), dict(sd.get("meta", {})),
            ))
        return traj
    except TrajectoryFileError:
        raise
    except (KeyError, TypeError, ValueError, ModelError) as e:
        raise TrajectoryFileError(f"malformed trajectory: {e}") from e


def loads(text: str) -> Trajectory:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise TrajectoryFileError(f"invalid JSON: {e}") from e
    if not isinstance(d, dict):
        raise TrajectoryFileError("top level must be an object")
    return trajectory_from_dict(d)


def write_json(traj: Trajectory, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(traj))


def read_json(path: Union[str, Path]) -> Trajectory:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise TrajectoryFileError(str(e)) from e
    return loads(text)


def to_csv(traj: Trajectory) -> str:
    lines = [f"# format_version: {FORMAT_VERSION}", ",".join(CSV_COLUMNS)]
    for seg in traj.segments:
        s = seg.samples
        block = np.column_stack([s.t, s.q, s.u, s.lam, s.phi_v, s.phi_omega, s.H])
        lines.extend(",".join(_num(v) for v in row) for row in block)
    return "\n".join(lines) + "\n"


def write_csv(traj: Trajectory, path: Union[str, Path]) -> None:
    Path(path).write_text(to_csv(traj))


def _directive(d: dict, i: int):
    from . import composer

    kinds = {
        "Auto": composer.Auto,
        "Regular": composer.Regular,
        "MergingCurve": composer.MergingCurve,
        "Straight": composer.Straight,
        "PhiVSingular": composer.PhiVSingular,
        "PhiOmegaSingular": composer.PhiOmegaSingular,
    }
    if not isinstance(d, dict) or d.get("type") not in kinds:
        raise TrajectoryFileError(f"directive {i}: type must be one of {', '.join(kinds)}")
    args = {k: (tuple(v) if isinstance(v, list) else v) for k, v in d.items() if k != "type"}
    try:
        return kinds[d["type"]](**args)
    except TypeError as e:
        raise TrajectoryFileError(f"directive {i}: {e}") from e


def script_from_dict(d: dict):
    """Parse ``{"q0": [...], "lambda0": [...]?, "directives": [{"type": ...}, ...]}``."""
    from .model import AdjointState, Configuration

    try:
        q0 = Configuration(*map(float, d["q0"]))
        lam0 = AdjointState(*map(float, d["lambda0"])) if d.get("lambda0") is not None else None
        directives = [_directive(x, i) for i, x in enumerate(d["directives"])]
    except TrajectoryFileError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise TrajectoryFileError(f"malformed script: {e}") from e
    return q0, lam0, directives


def read_script(path: Union[str, Path]):
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise TrajectoryFileError(f"cannot read script: {e}") from e
    if not isinstance(d, dict):
        raise TrajectoryFileError("script must be a JSON object")
    return script_from_dict(d)
