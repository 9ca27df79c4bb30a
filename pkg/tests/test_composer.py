import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trailer_extremals.checker import check_pmp
from trailer_extremals.composer import (
    Auto,
    MergingCurve,
    PhiOmegaSingular,
    PhiVSingular,
    Regular,
    ScriptError,
    SimOptions,
    Straight,
    WindowEvidence,
    classify_regime,
    run_script,
    simulate_extremal,
)
from trailer_extremals.dynamics import integrate_bang_bang
from trailer_extremals.model import AdjointState, Configuration, Line, ModelError, SegmentKind
from trailer_extremals.singular import MergeBranch, merging_curve

ZERO = Configuration(0.0, 0.0, 0.0, 0.0)
QUIET = WindowEvidence(0.0, 0.0)


def test_classify_regular():
    r = classify_regime(1.0, 0.5, AdjointState(1, 0, 0.5, 0))
    assert (r.name, r.v_sign, r.omega_sign) == ("Regular", 1, 1)


def test_instantaneous_zero_is_a_switch():
    r = classify_regime(0.0, 0.5, AdjointState(1, 0, 0.5, 0), window=WindowEvidence(1.0, 0.5))
    assert (r.name, r.v_sign) == ("Regular", 0)


def test_classify_singular():
    assert classify_regime(0.0, 1.0, AdjointState(0, 0, 1, 0), window=WindowEvidence(0.0, 1.0)).name == "PhiVSingular"
    assert classify_regime(0.0, 0.0, AdjointState(0, 0, 1, -1), window=QUIET).name == "Abnormal"
    assert classify_regime(1.0, 0.0, AdjointState(1, 0, 0, 0), window=WindowEvidence(1, 0)).name == "Straight"


def test_first_switch_at_half_pi():
    tr = simulate_extremal(ZERO, AdjointState(1, 0, 0.5, 0), 4.0)
    assert abs(tr.switch_times()[0] - math.pi / 2) <= 1e-9
    assert [s.kind for s in tr.segments[:2]] == [SegmentKind.REGULAR_FL, SegmentKind.REGULAR_BL]


def test_phi_v_singular_forever():
    tr = simulate_extremal(ZERO, AdjointState(0, 0, 1, 0), 3.0)
    assert [s.kind for s in tr.segments] == [SegmentKind.PHI_V_SINGULAR]
    assert np.all(tr.segments[0].samples.u == [0.0, 1.0])


def test_straight_forever():
    tr = simulate_extremal(ZERO, AdjointState(1, 0, 0, 0), 5.0)
    assert [s.kind for s in tr.segments] == [SegmentKind.STRAIGHT]
    assert tr.final_q().close_to(Configuration(5, 0, 0, 0))


def test_rejects_bad_inputs():
    with pytest.raises(ModelError):
        simulate_extremal(ZERO, AdjointState(0, 0, 0, 0), 1.0)
    with pytest.raises(ModelError):
        simulate_extremal(ZERO, AdjointState(1, 0, 0, 0), 0.0)


def test_chattering_truncates():
    tr = simulate_extremal(Configuration(0.3, -0.2, 1.0, 0.5), AdjointState(1.2, -0.4, 0.3, 0.9), 40.0,
                           SimOptions(max_switches=3))
    assert tr.truncated and len(tr.segments) == 4


def test_auto_stays_straight_after_touchdown():
    seg = merging_curve(Line(1, 0, 0), -1, MergeBranch(-1), 0.3)
    tr = simulate_extremal(seg.samples[0].q, seg.samples[0].lam, seg.duration + 2.0)
    assert [s.kind for s in tr.segments] == [SegmentKind.PHI_OMEGA_SINGULAR, SegmentKind.STRAIGHT]
    assert tr.segments[1].meta["snap"]["config_jump"] < 1e-5
    assert check_pmp(tr).passed


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_auto_runs_satisfy_maximum_principle(seed):
    rng = np.random.default_rng(seed)
    q0 = Configuration(*rng.uniform(-3, 3, 4))
    tr = simulate_extremal(q0, AdjointState(*rng.normal(size=4)), 5.0)
    s = tr.all_samples()
    assert np.ptp(s.H) <= 1e-6
    mv, mw = np.abs(s.phi_v) > 1e-9, np.abs(s.phi_omega) > 1e-9
    assert np.allclose((s.u[:, 0] * s.phi_v)[mv], np.abs(s.phi_v[mv]))
    assert np.allclose((s.u[:, 1] * s.phi_omega)[mw], np.abs(s.phi_omega[mw]))
    for a, b in zip(tr.segments, tr.segments[1:]):
        assert np.max(np.abs(a.samples.q[-1] - b.samples.q[0])) <= 1e-9
        assert np.max(np.abs(a.samples.lam[-1] - b.samples.lam[0])) <= 1e-9
    assert check_pmp(tr).passed


@settings(max_examples=8)
@given(st.integers(0, 2**32 - 1))
def test_fast_path_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    q0, lam0 = Configuration(*rng.uniform(-1, 1, 4)), AdjointState(*rng.normal(size=4))
    T = float(rng.uniform(1, 10))
    tr = simulate_extremal(q0, lam0, T)
    oracle, _ = integrate_bang_bang(q0, lam0, T, 1e-4)
    assert np.max(np.abs(tr.final_q().as_array() - oracle.q[-1])) <= 1e-6


def test_empty_and_straight_scripts():
    assert run_script(ZERO, []).segments == []
    tr = run_script(ZERO, [Straight(5)])
    assert tr.final_q().close_to(Configuration(5, 0, 0, 0))
    assert np.allclose(tr.segments[0].samples.lam[-1], [1, 0, 0, 0])


def test_figure_style_script_passes_checker():
    tr = run_script(Configuration(0, 0, 0, -0.5), [
        Regular(1, 1, 1.0), MergingCurve(-1), Straight(3), MergingCurve(1, mode="depart"),
    ])
    assert [s.exit_reason for s in tr.segments] == ["duration", "touchdown", "duration", "saturation"]
    assert check_pmp(tr).passed
    for a, b in zip(tr.segments, tr.segments[1:]):
        jump = np.max(np.abs(a.samples.q[-1] - b.samples.q[0]))
        assert jump <= 1e-9 or ("snap" in b.meta and jump <= 1e-5)


def test_singular_then_auto_is_continuous():
    tr = run_script(Configuration(0, 0, 0, 0.2), [PhiOmegaSingular(0.4, 1.0, 6.0), Auto(3.0)])
    assert tr.segments[0].exit_reason == "saturation" and tr.segments[1].kind.is_regular
    assert check_pmp(tr).passed


def test_phi_v_directive():
    tr = run_script(ZERO, [PhiVSingular(-1, 0.5, 2.0)])
    assert tr.final_q().theta == pytest.approx(-2.0)


def test_directive_errors_name_the_index():
    with pytest.raises(ScriptError) as e:
        run_script(ZERO, [Regular(1, 1, 1.0), MergingCurve(-1)])
    assert e.value.index == 1
    with pytest.raises(ScriptError, match="directive 0"):
        run_script(ZERO, [Auto(1.0)])
    with pytest.raises(ScriptError, match="directive 0"):
        run_script(Configuration(0, 0, 0, 0.3), [MergingCurve(1)])
