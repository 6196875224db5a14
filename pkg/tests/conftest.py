import numpy as np
import pytest

from kolab.exponents import (Kind, SystemParams, classify_regimes, compute_exponents,
                             particular_coefficients)
from kolab.radial import sample_particular, solve_regular

MODEL = dict(n_dim=3, p=2.0, q=2.0, delta=2.0, mu=2.0)


def random_params(rng, kinds=(Kind.ABSORPTION, Kind.MIXED), min_d=0.1, weights=True):
    """One valid parameter set with D >= min_d (rejection sampling)."""
    while True:
        n = int(rng.integers(3, 7))
        p, q = rng.uniform(1.2, n - 0.3, size=2)
        delta, mu = rng.uniform(0.2, 6.0, size=2)
        a, b = rng.uniform(-0.5, 1.0, size=2) if weights else (0.0, 0.0)
        params = SystemParams(n, p, q, delta, mu, a, b, kinds[int(rng.integers(len(kinds)))])
        if compute_exponents(params).big_d >= min_d:
            return params


def random_particular(rng, margin=0.05, max_exponent=10.0):
    """Parameter set admitting a particular solution, exponents kept moderate."""
    while True:
        params = random_params(rng)
        ex = compute_exponents(params)
        if not classify_regimes(params, ex).particular_exists:
            continue
        if abs(ex.gamma_ab - ex.harmonic_p) < margin or abs(ex.xi_ab - ex.harmonic_q) < margin:
            continue
        if max(ex.gamma_ab, ex.xi_ab) > max_exponent:
            continue
        return params


@pytest.fixture(scope="session")
def model():
    return SystemParams(**MODEL)


@pytest.fixture(scope="session")
def model_regular(model):
    return solve_regular(model, 1.0, 1.0)


@pytest.fixture(scope="session")
def model_particular(model):
    return sample_particular(model, particular_coefficients(model))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
