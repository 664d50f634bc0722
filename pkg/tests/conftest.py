import pytest

import support


@pytest.fixture
def cartesian():
    return support.q_cartesian()


@pytest.fixture
def binary_join():
    return support.q_binary_join()


@pytest.fixture
def star2():
    return support.q_star(2)


@pytest.fixture
def triangle():
    return support.q_triangle()


@pytest.fixture
def figure_fleet():
    """17 machines: weights 4,4,3,2,2,2 and eleven 1s; sum of squares 64."""
    from hetcube import MachineFleet

    return MachineFleet.linear([4, 4, 3, 2, 2, 2] + [1] * 11)
