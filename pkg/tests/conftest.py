import numpy as np
import pytest

from stabgeom import samplers as S


@pytest.fixture
def rng():
    return S.SeededRng(2024)


def random_pure(dim, seed):
    return S.haar_pure(dim, S.SeededRng(seed))


def random_mixed(dim, seed):
    return S.hs_mixed(dim, S.SeededRng(seed))


def random_hermitian(dim, seed):
    g = np.random.default_rng(seed)
    a = g.normal(size=(dim, dim)) + 1j * g.normal(size=(dim, dim))
    return a + a.conj().T
