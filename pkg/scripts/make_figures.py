"""Regenerate the figure SVGs from the composition scripts in figures/.

Each script is composed, checked and plotted through the command-line entry
point, so this doubles as an end-to-end smoke test of the CLI.

    python3 scripts/make_figures.py [--out-dir DIR] [--glyph-interval DT]
"""

import argparse
import sys
from pathlib import Path

from trailer_extremals.cli import main as cli

HERE = Path(__file__).resolve().parent
SCRIPTS = sorted((HERE / "figures").glob("fig_*.json"))


def make(script: Path, out_dir: Path, glyph_interval: float) -> Path:
    traj = out_dir / (script.stem + ".traj.json")
    svg = out_dir / (script.stem + ".svg")
    rc = cli(["compose", str(script), "-o", str(traj)])
    if rc != 0:
        raise SystemExit(f"{script.name}: compose exited {rc}")
    rc = cli(["check", str(traj)])
    if rc != 0:
        raise SystemExit(f"{script.name}: check exited {rc}")
    rc = cli(["plot", str(traj), str(svg), "--glyph-interval", str(glyph_interval)])
    if rc != 0:
        raise SystemExit(f"{script.name}: plot exited {rc}")
    return svg


def run(out_dir: Path, glyph_interval: float = 2.0) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    return [make(s, out_dir, glyph_interval) for s in SCRIPTS]


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=HERE / "figures" / "out")
    ap.add_argument("--glyph-interval", type=float, default=2.0)
    a = ap.parse_args()
    for p in run(a.out_dir, a.glyph_interval):
        print(p)
    sys.exit(0)
