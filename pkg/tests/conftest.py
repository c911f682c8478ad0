import functools
import math

import pytest

from flexspan import fixtures
from flexspan.params import complete


@functools.lru_cache(maxsize=None)
def completions(name):
    return tuple(complete(fixtures.get(name).params()))


@functools.lru_cache(maxsize=None)
def table_geometry(name):
    """The completion carrying the printed DI (or the only one for symmetric rows)."""
    fx = fixtures.get(name)
    gs = completions(name)
    if fx.di is None:
        return gs[0]
    for g in gs:
        if g.di == fx.di:
            return g
    raise AssertionError(f"{name}: printed DI {fx.di} not among completions")


@pytest.fixture
def geom_of():
    return table_geometry


def deg(x):
    return math.degrees(x)
