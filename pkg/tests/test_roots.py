import math

import pytest

from rieszlab.errors import RootFindingError
from rieszlab.roots import bisect, grow_bracket


def test_bisect_sqrt2():
    r = bisect(lambda x: x * x - 2, 0.0, 2.0, rtol=1e-15)
    assert abs(r - math.sqrt(2)) < 1e-14


def test_grow_bracket_then_bisect():
    f = lambda x: math.log(x) - 5
    lo, hi = grow_bracket(f, 1.0, 2.0)
    assert f(lo) < 0 < f(hi)
    assert abs(bisect(f, lo, hi) - math.exp(5)) < 1e-9


def test_unbracketed_raises():
    with pytest.raises(RootFindingError):
        bisect(lambda x: x * x + 1, -1.0, 1.0)
    with pytest.raises(RootFindingError):
        grow_bracket(lambda x: 1.0, 0.0, 1.0, max_steps=5)
