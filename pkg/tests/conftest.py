import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo one verdict line per acceptance criterion in the summary,
    regardless of capture mode."""
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_pd(p, seed, jitter=0.5):
    """Random symmetric positive definite matrix: A'A/p + jitter*I."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((p, p))
    return a.T @ a / p + jitter * np.eye(p)


def random_sample_cov(p, n, seed):
    """Sample covariance of an n x p standard normal draw (PD when n > p)."""
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((n, p))
    return y.T @ y / n


@pytest.fixture
def rng():
    return np.random.default_rng(0)
