import numpy as np
import pytest

from probboost.core import Dataset, make_synthetic_dataset


@pytest.fixture
def small_dataset() -> Dataset:
    return make_synthetic_dataset(n=20, seed=3)


@pytest.fixture
def tiny_dataset() -> Dataset:
    return Dataset.from_arrays(
        features=[[0.0], [1.0], [2.0], [3.0]],
        labels=[-1, -1, 1, 1],
    )


@pytest.fixture
def xor_dataset() -> Dataset:
    return Dataset.from_arrays(
        features=[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]],
        labels=[-1, 1, 1, -1],
    )
