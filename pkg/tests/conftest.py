import numpy as np
import pytest
from hypothesis import settings

from maxinfo.prob import JointPMF, Domain

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_joint(rng: np.random.Generator, max_support: int = 12) -> JointPMF:
    """Random joint on a small grid with at most ``max_support`` nonzero cells."""
    rows = int(rng.integers(1, 5))
    cols = int(rng.integers(1, 5))
    cells = rows * cols
    k = int(rng.integers(1, min(cells, max_support) + 1))
    mass = np.zeros(cells)
    chosen = rng.choice(cells, size=k, replace=False)
    mass[chosen] = rng.dirichlet(np.ones(k) * float(rng.choice([0.3, 1.0, 3.0])))
    mass = mass.reshape(rows, cols)
    mass /= mass.sum()
    # drop empty rows/columns so every label has positive marginal
    mass = mass[mass.sum(axis=1) > 0][:, mass.sum(axis=0) > 0]
    return JointPMF(Domain(tuple(range(mass.shape[0]))), Domain(tuple(f"z{j}" for j in range(mass.shape[1]))), mass)


@pytest.fixture
def diag_bit():
    return JointPMF(Domain((0, 1)), Domain((0, 1)), np.array([[0.5, 0.0], [0.0, 0.5]]))


@pytest.fixture
def indep_bit():
    return JointPMF(Domain((0, 1)), Domain((0, 1)), np.full((2, 2), 0.25))
