import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trailer_extremals.model import (
    AdjointState,
    Configuration,
    Control,
    ExtremalConstants,
    Line,
    ModelError,
    Samples,
    Segment,
    SegmentKind,
    signed_distance,
    wrap_angle,
)

from .strategies import adjoints, configurations


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert abs(math.sin(w) - math.sin(a)) < 1e-6 and abs(math.cos(w) - math.cos(a)) < 1e-6


def test_wrap_angle_pi_maps_to_pi():
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi


def test_configuration_rejects_nan():
    with pytest.raises(ModelError):
        Configuration(0.0, float("nan"), 0.0, 0.0)


def test_close_to_compares_angles_modulo_two_pi():
    a = Configuration(1.0, 2.0, 0.1, -3.1)
    b = Configuration(1.0, 2.0, 0.1 + 2 * math.pi, -3.1 - 4 * math.pi)
    assert a.close_to(b)
    assert not a.close_to(Configuration(1.0, 2.0 + 1e-6, 0.1, -3.1))


@pytest.mark.parametrize("v, w", [(1.5, 0), (0, -1.01)])
def test_control_outside_square(v, w):
    with pytest.raises(ModelError):
        Control(v, w)


def test_constants_must_not_all_vanish():
    with pytest.raises(ModelError):
        ExtremalConstants(0.0, 0.0, 0.0, 0.0)


@given(configurations, adjoints)
def test_constants_reproduce_lambda_theta(q, lam):
    c = ExtremalConstants.from_initial(q, lam)
    assert c.c1 * q.y - c.c2 * q.x + c.c3 == pytest.approx(lam.ltheta, abs=1e-12)
    assert c.c4 == lam.lbeta


def test_line_of_constants():
    assert ExtremalConstants(0, 0, 1, 0).line() is None
    l = ExtremalConstants(3, 4, 5, 0).line()
    assert l.norm == 5
    assert signed_distance(l, 0.0, 0.0) == 1.0
    with pytest.raises(ModelError):
        Line(0.0, 0.0, 1.0)


def test_segment_kind_round_trip():
    for v in (1, -1):
        for w in (1, -1):
            assert SegmentKind.regular(v, w).signs == (v, w)
    assert SegmentKind.regular(1, 1) is SegmentKind.REGULAR_FL
    assert not SegmentKind.STRAIGHT.is_regular


def _samples(t):
    n = len(t)
    return Samples(t, np.zeros((n, 4)), np.tile([1.0, 0, 0, 0], (n, 1)), np.tile([1.0, 1.0], (n, 1)))


def test_samples_derived_columns():
    s = _samples([0.0, 0.5])
    assert np.allclose(s.phi_v, 1.0) and np.allclose(s.phi_omega, 0.0) and np.allclose(s.H, 1.0)
    assert s[1].t == 0.5 and s[1].u == Control(1.0, 1.0)


def test_segment_requires_increasing_time():
    with pytest.raises(ModelError):
        Segment(SegmentKind.STRAIGHT, _samples([0.0, 0.0]))
