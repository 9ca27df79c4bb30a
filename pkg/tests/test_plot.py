import re

import pytest

from trailer_extremals.model import Trajectory
from trailer_extremals.plot import REGULAR_COLOR, SINGULAR_COLOR, render_svg, trailer_axle

from .mutations import base_trajectory


@pytest.fixture(scope="module")
def traj():
    return base_trajectory()


def test_deterministic(traj):
    assert render_svg(traj) == render_svg(traj)


def test_classes_and_line(traj):
    svg = render_svg(traj, glyph_interval=2.0)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    kinds = re.findall(r'class="(regular|singular)"', svg)
    assert kinds.count("regular") == 1 and kinds.count("singular") == 3
    assert REGULAR_COLOR in svg and SINGULAR_COLOR in svg
    assert svg.count('class="ell"') == 1
    assert 'class="ell"' not in render_svg(traj, draw_lines=False)


def test_glyph_count_follows_interval(traj):
    n1 = render_svg(traj, glyph_interval=1.0).count('class="robot"')
    n2 = render_svg(traj, glyph_interval=2.0).count('class="robot"')
    assert n1 == int(traj.duration // 1.0) + 1
    assert n2 == int(traj.duration // 2.0) + 1


def test_empty_trajectory_gives_empty_canvas():
    svg = render_svg(Trajectory(None))
    assert "<polyline" not in svg and "</svg>" in svg


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_glyph_interval_must_be_positive(traj, bad):
    with pytest.raises(ValueError):
        render_svg(traj, glyph_interval=bad)


def test_trailer_sits_one_unit_behind():
    ax, ay = trailer_axle(0.0, 0.0, 0.0, 0.0)
    assert (ax, ay) == (-1.0, 0.0)
