import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message="Using `httpx` with `starlette")


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def random_complex(rng, ny, nx):
    return rng.standard_normal((ny, nx)) + 1j * rng.standard_normal((ny, nx))


def random_mask_cells(rng, ny, nx, rate=0.4):
    cells = (rng.random((ny, nx)) < rate).astype(np.uint8)
    cells[ny // 2, nx // 2] = 1  # keep at least one sample
    return cells


def rel_err(a, b):
    denom = np.linalg.norm(b)
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / (denom if denom else 1.0)
