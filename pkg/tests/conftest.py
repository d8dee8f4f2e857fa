import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from aaphase import InitialState, ModelParams

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

eps1s = st.floats(-2.0, 2.0, allow_nan=False)
gaps = st.floats(0.05, 3.0, allow_nan=False)
couplings = st.floats(0.0, 3.0, allow_nan=False)
omegas = st.floats(0.05, 3.0, allow_nan=False)
phases = st.floats(0.0, 2 * math.pi, allow_nan=False, exclude_max=True)


@st.composite
def params(draw, d0=couplings, omega=omegas):
    e1 = draw(eps1s)
    return ModelParams(eps1=e1, eps2=e1 + draw(gaps), d0=draw(d0), omega=draw(omega), phi0=draw(phases))


@st.composite
def states(draw):
    z = np.array([draw(st.floats(-1, 1)) + 1j * draw(st.floats(-1, 1)) for _ in range(2)])
    n = np.linalg.norm(z)
    if n < 1e-3:
        z, n = np.array([1.0, 0.0]), 1.0
    return InitialState.normalized(z[0] / n, z[1] / n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
