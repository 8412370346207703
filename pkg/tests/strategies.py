"""Hypothesis strategies for four-vectors and SL(2,C) elements."""
import numpy as np
from hypothesis import strategies as st

from qftverify.kinematics import boost, on_shell, rotation

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
unit_interval = st.floats(0.05, 1.0)


@st.composite
def three_vectors(draw, scale=3.0):
    return np.array([draw(st.floats(-scale, scale)) for _ in range(3)])


@st.composite
def directions(draw):
    v = draw(three_vectors())
    if np.linalg.norm(v) < 1e-3:
        v = np.array([0.3, -0.2, 0.9])
    return v / np.linalg.norm(v)


@st.composite
def sl2c(draw, max_rapidity=2.0):
    R = rotation(draw(directions()), draw(st.floats(0, 4 * np.pi)))
    B = boost(draw(directions()), draw(st.floats(-max_rapidity, max_rapidity)))
    return R @ B


@st.composite
def massive_momenta(draw, mass=1.0):
    return on_shell(mass, draw(three_vectors()))


@st.composite
def four_vectors(draw):
    return np.array([draw(finite) for _ in range(4)])
