"""Configuration of pytest for tsnswitch."""
import numpy as np
import pandas as pd
import pytest

import tsnswitch as ts
from tsnswitch.config import INFINITY


@pytest.fixture(autouse=True)
def patch_doctest_namespace(doctest_namespace):
    """Make numpy, pandas, tsnswitch and the sentinel of absent flows available in
    every doctest."""
    doctest_namespace.update(np=np, pd=pd, ts=ts, INFINITY=INFINITY)


@pytest.fixture(scope="session")
def seed():
    """Placeholder for the argument `seed` which is parametrized below."""
    return "placeholder value"


def pytest_addoption(parser):
    """Add the option ``--n-random-tests``.

    .. code-block:: bash

        $ pytest --n-random-tests=n

    runs every randomized test with ``n`` seeds. Each seed checks
    :data:`~tsnswitch.tests.random_scenario.N_INSTANCES_PER_SEED` random instances.

    """
    parser.addoption(
        "--n-random-tests",
        action="store",
        default=5,
        help="Number of seeds for each randomized test.",
    )


def pytest_generate_tests(metafunc):
    """Parametrize tests with an argument ``seed`` with consecutive seeds.

    The first seed is the one of `pytest-randomly` which changes with every session. To
    reproduce a failure, pass the reported seed with

    .. code-block:: bash

        $ pytest --randomly-seed=5

    and the tests run with the seeds 5, 6, 7, ...

    """
    if "seed" in metafunc.fixturenames:
        n_random_tests = int(metafunc.config.getoption("--n-random-tests"))
        base_seed = metafunc.config.getoption("--randomly-seed", 0)
        if not isinstance(base_seed, int):
            base_seed = 0

        metafunc.parametrize("seed", [base_seed + i for i in range(n_random_tests)])
