import numpy as np
import pytest

from mapper_forge import generate_blobs, generate_circle


@pytest.fixture(scope="session")
def circle():
    """Noisy circle shared by the reference runs (same draw as the fig1-circle preset)."""
    return generate_circle(n=400, radius=1.0, noise_sigma=0.05, seed=7)


@pytest.fixture(scope="session")
def two_blobs():
    return generate_blobs([(0, 0), (10, 0)], n_per=50, sigma=0.5, seed=1)


@pytest.fixture(scope="session")
def three_blobs():
    return generate_blobs([(0, 0), (10, 0), (0, 10)], n_per=30, sigma=0.5, seed=2)


@pytest.fixture(scope="session")
def one_blob():
    # the largest-gap outcome on a single Gaussian blob depends on the draw;
    # see test_gap_single_blob_seed_sensitivity
    return generate_blobs([(0, 0)], n_per=50, sigma=0.5, seed=2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
