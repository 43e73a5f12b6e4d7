import numpy as np
import pytest

from framelab.frame_core import mercedes_benz


@pytest.fixture
def mb3():
    return mercedes_benz()


def random_orthogonal(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_unit_rows(rng, n, d):
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
