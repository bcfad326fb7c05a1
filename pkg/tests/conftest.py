import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from densitymetrics import AlgebraShape, Trace

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SHAPES = [(1,), (2,), (3,), (1, 1), (1, 1, 1), (2, 1), (1, 2, 2)]

shapes = st.sampled_from(SHAPES).map(AlgebraShape)
seeds = st.integers(min_value=0, max_value=2**63 - 1)


@st.composite
def traces(draw, shape_strategy=shapes):
    shape = draw(shape_strategy)
    weights = draw(
        st.lists(
            st.floats(0.1, 5.0, allow_nan=False),
            min_size=shape.n_blocks,
            max_size=shape.n_blocks,
        )
    )
    return Trace(shape, tuple(weights))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def c2():
    return Trace.unit((1, 1))
