import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("pushforge", deadline=None, max_examples=40)
settings.load_profile("pushforge")


def tent_ref(k, x):
    """Closed-form k-piece tent map: k*x mod 2 folded back into [0, 1]."""
    y = np.mod(k * np.asarray(x, dtype=float), 2.0)
    return np.where(y <= 1.0, y, 2.0 - y)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=12345))
