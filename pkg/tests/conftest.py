"""Shared presentations and actions."""

import pytest

from monoboundary import MonoidPresentation, parse_ifs_text

from oracles import CANTOR_IFS, LINE_IFS, SIERPINSKI_IFS


@pytest.fixture(scope="session")
def f2():
    return MonoidPresentation(["x", "y"])


@pytest.fixture(scope="session")
def f3():
    return MonoidPresentation(["x", "y", "z"])


@pytest.fixture(scope="session")
def xz():
    """<x, y, z | xz = zx>"""
    return MonoidPresentation(["x", "y", "z"], [("x", "z")])


@pytest.fixture(scope="session")
def n2():
    """Free commutative monoid on two generators."""
    return MonoidPresentation(["x", "y"], [("x", "y")])


@pytest.fixture(scope="session")
def c4():
    """Square commutation graph a-b-c-d-a."""
    return MonoidPresentation(
        ["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")]
    )


@pytest.fixture(scope="session")
def cantor(f2):
    return parse_ifs_text(f2, CANTOR_IFS)


@pytest.fixture(scope="session")
def sierpinski(f3):
    return parse_ifs_text(f3, SIERPINSKI_IFS)


@pytest.fixture(scope="session")
def line_action(n2):
    return parse_ifs_text(n2, LINE_IFS)
