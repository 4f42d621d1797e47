import numpy as np
import pytest

from phononqnd.params import AncillaParams
from phononqnd.steady_state import UnstableBranchError, solve_steady_state


def draw_ancilla(rng, kerr=True, max_lambda=0.5):
    return AncillaParams(
        delta_omega=rng.uniform(-3, 3),
        lambda11=rng.uniform(0, max_lambda) if kerr else 0.0,
        epsilon=rng.uniform(0.05, 3),
        damping_thermal=rng.uniform(0, 1),
        damping_measurement=rng.uniform(0.05, 1),
        N_bar1=rng.uniform(0, 2),
        N_m=rng.uniform(0, 2),
    )


def stable_draws(rng, count, kerr=True, max_lambda=0.5):
    out = []
    while len(out) < count:
        p = draw_ancilla(rng, kerr, max_lambda)
        try:
            out.append((p, solve_steady_state(p).branch("operating")))
        except UnstableBranchError:
            pass
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
