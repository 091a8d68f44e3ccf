from pathlib import Path

import numpy as np
import pytest

from ipmrsm import eval_response, ipm_first_order

DATA = Path(__file__).parent / "data"

# fitted cassava-yield coefficients, first-order model (11, 01, 10, 00)
YIELD_FIRST = (0.356, -0.0092, -0.2201, 0.0115)
YIELD_B20 = 0.2022


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def grid4x4():
    return np.array([(a, b) for a in (1, 2, 3, 4) for b in (1, 2, 3, 4)], dtype=float)


@pytest.fixture
def first_model():
    return ipm_first_order()


@pytest.fixture
def noiseless(grid4x4, first_model):
    return grid4x4, eval_response(first_model, YIELD_FIRST, grid4x4)
