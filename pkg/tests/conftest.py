import pytest

import swmlab as sl


@pytest.fixture
def or_indicator():
    """Two agents over two items: an OR function and an indicator that only
    values item 0.  Greedy gets welfare 1 or 2 depending on order; OPT = 2."""
    v1 = sl.make_table(2, {"": 0, "0": 1, "1": 1, "0,1": 1})
    v2 = sl.make_table(2, {"": 0, "0": 1, "1": 0, "0,1": 1})
    return sl.Instance((v1, v2), name="or-indicator")


@pytest.fixture
def additive_2x2():
    o1 = sl.make_additive([3.0, 2.0])
    o2 = sl.make_additive([2.0, 3.0])
    return sl.Instance((o1, o2))
