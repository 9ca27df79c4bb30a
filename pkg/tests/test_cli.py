import json
import math

import numpy as np
import pytest

from trailer_extremals import cli, io
from trailer_extremals.config import SEEDS
from trailer_extremals.model import SegmentKind


def run(args):
    return cli.main([str(a) for a in args])


def test_regular_primitive_lambda_beta(tmp_path):
    out = tmp_path / "r.json"
    assert run(["primitive", "regular", "--v", 1, "--omega", 1, "--beta0", 0, "--lbeta0", 1, "--dt", 2, "-o", out]) == 0
    tr = io.read_json(out)
    assert len(tr.segments) == 1
    assert tr.segments[0].samples.lam[-1, 3] == pytest.approx(5.0, abs=1e-9)


@pytest.mark.parametrize("args", [
    ["primitive", "regular", "--omega", 0, "--dt", 1],
    ["primitive", "regular", "--v", 1, "--omega", 1],
    ["primitive", "merge", "--branch", 1],
    ["primitive", "merge", "--branch", 0, "--beta-start", 0.2],
    ["primitive", "phiv", "--v", 2, "--dt", 1],
    ["simulate", "--lambda0", "0,0,0,0"],
    ["simulate", "--lambda0", "1,0"],
    ["simulate", "--T", -1],
    ["simulate", "--batch", "seeds.txt"],
])
def test_usage_errors_exit_2(args, capsys):
    assert run(args) == 2
    assert "error:" in capsys.readouterr().err


def test_merge_branches(tmp_path):
    # the reversing branch merges onto y = 0; the forward branch is its time-reversed reading
    for b in (-1, 1):
        out = tmp_path / f"m{b}.json"
        assert run(["primitive", "merge", "--branch", b, "--beta-start", 0.2618, "-o", out]) == 0
        s = io.read_json(out).segments[0].samples
        on_line = s.q[-1] if b == -1 else s.q[0]
        assert abs(on_line[1]) <= 2.1e-6 and abs(math.sin(on_line[3])) <= 1e-6 * (1 + 1e-6)


def test_simulate_first_switch(capsys):
    assert run(["simulate", "--q0", "0,0,0,0", "--lambda0", "1,0,0.5,0", "--T", 4]) == 0
    cap = capsys.readouterr()
    tr = io.loads(cap.out)
    assert abs(tr.switch_times()[0] - math.pi / 2) <= 1e-9
    assert "switch times: 1.5707963268" in cap.err


def test_simulate_straight(tmp_path):
    out = tmp_path / "s.json"
    assert run(["simulate", "--lambda0", "1,0,0,0", "--q0", "0,0,0,0", "--T", 5, "-o", out]) == 0
    tr = io.read_json(out)
    assert [s.kind for s in tr.segments] == [SegmentKind.STRAIGHT]
    assert tr.final_q().x == pytest.approx(5.0)


def test_simulate_seed_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["simulate", "--seed", 7, "--T", 2, "-o", a])
    run(["simulate", "--seed", 7, "--T", 2, "-o", b])
    assert a.read_bytes() == b.read_bytes()


def test_simulate_truncation_exit_3(tmp_path):
    code = run(["simulate", "--q0", "0.3,-0.2,1,0.5", "--lambda0", "1.2,-0.4,0.3,0.9", "--T", 40,
                "--max-switches", 3, "-o", tmp_path / "t.json"])
    assert code == 3


def test_batch(tmp_path):
    seeds = tmp_path / "seeds.txt"
    seeds.write_text("# q0 then lambda0\n0,0,0,0,1,0,0.5,0\n0,0,0,0,1,0,0,0,2\n")
    assert run(["simulate", "--batch", seeds, "--T", 3, "-o", tmp_path / "runs"]) == 0
    assert io.read_json(tmp_path / "runs" / "run_0001.json").duration == pytest.approx(2.0)
    assert sorted(p.name for p in (tmp_path / "runs").iterdir()) == ["run_0000.json", "run_0001.json"]


def test_simulate_then_check_over_seeds(tmp_path, capsys):
    rng = np.random.default_rng(SEEDS.cli_roundtrip)
    for k in range(5):
        out = tmp_path / f"{k}.json"
        assert run(["simulate", "--seed", int(rng.integers(1 << 31)), "--T", 3, "-o", out]) in (0, 3)
        assert run(["check", out]) == 0, capsys.readouterr().out


def test_check_names_corrupted_control(tmp_path, capsys):
    out = tmp_path / "s.json"
    run(["simulate", "--q0", "0,0,0,0", "--lambda0", "1,0,0.5,0", "--T", 4, "-o", out])
    d = json.loads(out.read_text())
    d["segments"][0]["samples"]["v"][10] = 0.0
    out.write_text(json.dumps(d))
    capsys.readouterr()
    rep = tmp_path / "rep.json"
    assert run(["check", out, "--json", rep]) == 1
    assert "switching_consistency  FAIL" in capsys.readouterr().out
    assert json.loads(rep.read_text())["checks"]["switching_consistency"]["status"] == "FAIL"


def test_check_truncated_file(tmp_path):
    out = tmp_path / "s.json"
    run(["simulate", "--lambda0", "1,0,0,0", "--T", 1, "-o", out])
    out.write_text(out.read_text()[:200])
    assert run(["check", out]) == 2


def test_plot(tmp_path):
    src, svg = tmp_path / "s.json", tmp_path / "s.svg"
    run(["simulate", "--q0", "0,0,0,0", "--lambda0", "1,0,0.5,0", "--T", 4, "-o", src])
    assert run(["plot", src, svg, "--glyph-interval", 0.5]) == 0
    first = svg.read_bytes()
    assert run(["plot", src, svg, "--glyph-interval", 0.5]) == 0
    assert svg.read_bytes() == first and b"<svg" in first
    assert run(["plot", src, svg, "--glyph-interval", 0]) == 2
    assert run(["plot", tmp_path / "missing.json", svg]) == 2


def test_compose_and_csv(tmp_path):
    script = tmp_path / "s.json"
    script.write_text(json.dumps({"q0": [0, 0, 0, -0.5], "directives": [
        {"type": "Regular", "v": 1, "omega": 1, "dt": 1.0},
        {"type": "MergingCurve", "sigma": -1},
        {"type": "Straight", "length": 2},
    ]}))
    out, csv = tmp_path / "o.json", tmp_path / "o.csv"
    assert run(["compose", script, "-o", out, "--csv", csv]) == 0
    assert run(["check", out]) == 0
    assert csv.read_text().splitlines()[1].startswith("t,x,y,theta,beta,v,omega")
    script.write_text(json.dumps({"q0": [0, 0, 0, 0], "directives": [{"type": "MergingCurve", "sigma": 1}]}))
    assert run(["compose", script]) == 2
