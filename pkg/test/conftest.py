# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

import numpy as np
import pytest

DEFAULT_SEED = 4711


def pytest_addoption(parser):
    parser.addoption("--seed", action="store", type=int,
                     default=DEFAULT_SEED,
                     help="Seed of the random points and starts used by "
                     "the test cases")


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "fast: mark the test case as having a short execution time"
    )
    config.addinivalue_line(
        "markers", "slow: mark the test case as running one or more full "
        "solves"
    )


@pytest.fixture
def seed(request):
    return request.config.option.seed


@pytest.fixture
def rng(seed):
    return np.random.default_rng(seed)
