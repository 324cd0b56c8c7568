import numpy as np
import pytest

from freelab import measure as M
from freelab.free_conv import free_add_convolve, semicircular_smooth


@pytest.fixture(scope="session")
def semicircle():
    return M.semicircle()


@pytest.fixture(scope="session")
def uniform():
    return M.uniform()


@pytest.fixture(scope="session")
def bernoulli():
    return M.bernoulli()


@pytest.fixture(scope="session")
def arcsine_unit():
    """Arcsine law with variance 1, supported on [-sqrt 2, sqrt 2]."""
    return M.arcsine(1.0)


@pytest.fixture(scope="session")
def bernoulli_pair(bernoulli):
    """Bernoulli [+] Bernoulli, the arcsine law on [-2, 2]."""
    return free_add_convolve(bernoulli, bernoulli)


@pytest.fixture(scope="session")
def smoothed_bernoulli(bernoulli):
    return semicircular_smooth(bernoulli, 0.5)


@pytest.fixture(scope="session")
def smoothed_bernoulli_quarter(bernoulli):
    return semicircular_smooth(bernoulli, 0.25)


def l1(mu, nu):
    """L1 distance between two grid densities, on the finer of the two grids."""
    ref, other = (mu, nu) if mu.h <= nu.h else (nu, mu)
    return float(np.dot(ref.weights, np.abs(ref.density - np.interp(ref.x, other.x, other.density,
                                                                      left=0.0, right=0.0))))


@pytest.fixture(scope="session")
def flows(semicircle, uniform, smoothed_bernoulli):
    """Entropy by the Fisher-information flow for the three cross-method anchors."""
    from freelab.entropy import chi_via_fisher_flow
    return {name: chi_via_fisher_flow(mu) for name, mu in
            [("semicircle", semicircle), ("uniform", uniform), ("smoothed_bernoulli", smoothed_bernoulli)]}
