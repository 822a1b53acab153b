import numpy as np
import pytest

from facegraph import EMBEDDING_DIM

FIXTURES = __import__("pathlib").Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_embedding(rng, scale=1.0):
    return rng.standard_normal(EMBEDDING_DIM) * scale


def basis_embedding(coord, value):
    v = np.zeros(EMBEDDING_DIM)
    v[coord] = value
    return v
