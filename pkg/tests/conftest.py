import pytest
from hypothesis import settings, strategies as st

from khlambda.dvr import DvrScalar

settings.register_profile("khlambda", deadline=None, max_examples=60)
settings.load_profile("khlambda")

small = st.integers(min_value=-5, max_value=5)


@st.composite
def scalars(draw, allow_zero=True):
    num = draw(st.lists(small, min_size=1, max_size=4))
    if not allow_zero and not any(num):
        num[0] = 1
    den = draw(st.lists(small, min_size=0, max_size=3))
    const = draw(st.integers(min_value=1, max_value=4)) * draw(st.sampled_from([1, -1]))
    shift = draw(st.integers(min_value=0, max_value=3))
    return DvrScalar.from_fraction([0] * shift + num, [const] + den)


@pytest.fixture(scope="session")
def knot_table():
    from khlambda.diagram import builtin_table
    return builtin_table()
