import numpy as np
import pytest

from ciphermatch.he.bfv import keygen
from ciphermatch.models.he_params import HeParams


def pytest_addoption(parser):
    parser.addoption(
        "--acceptance",
        action="store_true",
        default=False,
        help="also run the slow checks at the default ring dimension",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: slow checks at full-size parameters")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--acceptance"):
        return

    skip = pytest.mark.skip(reason="needs --acceptance")
    for item in items:
        if "acceptance" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def small_params():
    # 64 coefficients x 16 bits = 1024 data bits per polynomial
    return HeParams(n=64)


@pytest.fixture
def tiny_params():
    return HeParams(n=8, q_bits=16, t_bits=4)


@pytest.fixture
def keys(small_params, rng):
    return keygen(small_params, rng)


@pytest.fixture
def params_file(tmp_path):
    path = tmp_path / "params.json"
    path.write_text('{"n": 64}', encoding="utf-8")
    return path
