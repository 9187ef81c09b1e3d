import time
from pathlib import Path

import pytest

from tanglefloer.tangle import load
from tanglefloer.tracer import henon_like, trace

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# every well-formed tangle fixture; duplicate_tu.tgl is deliberately broken
TANGLES = ["figure8", "tilted", "henon_pair", "chaos", "badflip_pre", "badflip_post",
           "heart11", "reversing", "single", "empty"]


def fixture_path(name):
    return FIXTURES / (name if "." in name else name + ".tgl")


def fixture_tangle(name):
    return load(fixture_path(name))


@pytest.fixture(scope="session")
def tangles():
    return {name: fixture_tangle(name) for name in TANGLES}


def _timed_trace(tau, budget, **kw):
    start = time.perf_counter()
    result = trace(henon_like(tau, 0.3), budget=budget, **kw)
    return result, time.perf_counter() - start


@pytest.fixture(scope="session")
def traced_quadratic():
    return _timed_trace(0.0, 3.3)


@pytest.fixture(scope="session")
def traced_cubic():
    # the cubic's four lobes need a longer budget before the chains reach window 2
    return _timed_trace(1.0, 5.0)
