import numpy as np
import pytest

from kahler_decoherence.pauli_channel import DecoherenceRates, density_from_bloch


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def random_bloch(rng, pure=False):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return v if pure else v * rng.uniform() ** (1 / 3)


def random_state(rng, pure=False):
    return density_from_bloch(random_bloch(rng, pure))


def random_cp_rates(rng, high=3.0):
    return DecoherenceRates.from_array(rng.uniform(0, high, size=3))


def random_positive_only_rates(rng):
    """Rates with one negative entry but nonnegative pairwise sums."""
    while True:
        g = rng.uniform(-1, 2, size=3)
        r = DecoherenceRates.from_array(g)
        if g.min() < 0 and r.pairwise_sums().min() >= 0:
            return r
