import numpy as np
import pytest

from magdot.model import ModelParams

# The reference parameter sets of the two figure runs.  The bath cutoff is
# physically irrelevant for these figures (it only rescales rates by
# exp(-|w|/Gamma) ~ 1); acceptance runs use a large value so that the
# drift/diffusion functions, which carry no cutoff factor, describe the
# master rates without a ~1% systematic lag.
FIG_KW = dict(n_spins=1000, temp_bath=0.65, coupling_j=1.0, debye_cutoff=1e6)


@pytest.fixture(scope="session")
def fig1_params():
    return ModelParams(coupling_g=0.05, **FIG_KW)


@pytest.fixture(scope="session")
def fig2_params():
    return ModelParams(coupling_g=0.0, **FIG_KW)


def small_params(n=150, g=0.05, temp=0.65, **kw):
    kw.setdefault("debye_cutoff", 1e6)
    return ModelParams(n_spins=n, temp_bath=temp, coupling_g=g, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
