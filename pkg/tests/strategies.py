import math

from hypothesis import strategies as st

from trailer_extremals.model import AdjointState, Configuration

finite = st.floats(-5, 5, allow_nan=False)
angles = st.floats(-math.pi, math.pi, allow_nan=False)
signs = st.sampled_from([-1, 1])
configurations = st.builds(Configuration, finite, finite, angles, angles)
adjoints = st.builds(AdjointState, finite, finite, finite, finite).filter(
    lambda l: max(abs(l.lx), abs(l.ly), abs(l.ltheta), abs(l.lbeta)) > 1e-3
)
