import pytest

from einstype.fixtures import FIXTURES, make_fixture

ALL_FIXTURES = tuple(FIXTURES)
ROTATIONAL = tuple(n for n in ALL_FIXTURES if n != "sphere_slice")

_cache = {}


def get_fixture(name):
    if name not in _cache:
        _cache[name] = make_fixture(name)
    return _cache[name]


@pytest.fixture(params=ALL_FIXTURES)
def any_fixture(request):
    return get_fixture(request.param)


@pytest.fixture(params=ROTATIONAL)
def rot_fixture(request):
    return get_fixture(request.param)
