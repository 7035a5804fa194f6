import sys
import functools

import pytest

from treewalk import walks
from treewalk.curve import find_R, second_derivative, tangent_at_R
from treewalk.xi_psi import build_psi

# the three supports on Z2*Z2*Z2 used throughout, plus the simple walks
EXAMPLE_WALKS = ("w1", "w2", "w3")
ALL_WALKS = ("nn3", "w1", "w2", "w3", "f2")


@functools.lru_cache(maxsize=None)
def measure(name):
    return walks.NAMED[name]()


@functools.lru_cache(maxsize=None)
def system(name):
    return build_psi(measure(name))


@functools.lru_cache(maxsize=None)
def radius(name):
    return find_R(system(name))


@functools.lru_cache(maxsize=None)
def tangent(name):
    return tangent_at_R(system(name), radius(name))


@functools.lru_cache(maxsize=None)
def r_second(name):
    return second_derivative(system(name), radius(name), tangent(name))


@pytest.fixture
def nn3():
    return measure("nn3")


@pytest.fixture
def nn3_system():
    return system("nn3")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("]")[1].split(".")[0])):
        terminalreporter.write_line(line)
