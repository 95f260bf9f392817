import pytest

from iamod_codesign.engine import evaluate_grid
from iamod_codesign.lp import available_kernels
from iamod_codesign.scenario import load_scenario

from oracles import MINI_CITY

KERNELS = available_kernels()


@pytest.fixture(params=KERNELS)
def kernel(request):
    return request.param


@pytest.fixture(scope="session")
def mini_city():
    return load_scenario(MINI_CITY / "scenario.json")


_grid_cache = {}


@pytest.fixture(scope="session")
def mini_points(mini_city):
    """Full-grid evaluation of the mini-city per kernel, computed once."""
    def get(kernel=None):
        key = kernel or KERNELS[0]
        if key not in _grid_cache:
            _grid_cache[key] = evaluate_grid(mini_city, kernel=key)
        return _grid_cache[key]
    return get
