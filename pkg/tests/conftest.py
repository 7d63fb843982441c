import pytest

from k0calc import group_model


@pytest.fixture
def comp7():
    """Z[1/p : p != 7], torsion parameter 3."""
    return group_model.validate("cofinite", [7])


@pytest.fixture
def comp31():
    """Z[1/p : p != 31], torsion parameter 15."""
    return group_model.validate("cofinite", [31])


@pytest.fixture
def halves_third_squared():
    """S = {2} with 1/9 present but 1/27 absent."""
    return group_model.validate("finite", [2], {3: 2})


@pytest.fixture
def finite235():
    """Z[1/2, 1/3, 1/5], trivial ring."""
    return group_model.validate("finite", [2, 3, 5])
