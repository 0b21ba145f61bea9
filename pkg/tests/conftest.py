import pytest

from .helpers import random_model, toy_graph


@pytest.fixture
def graph50():
    """Deterministic 50-triple graph over 20 entities and 3 relations."""
    return toy_graph()


@pytest.fixture
def model8():
    """Random model over 8 entities, 3 relations, k=4."""
    return random_model()
