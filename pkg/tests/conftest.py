"""Shared fixtures: the N_t=4, N_r=4, K=3, Q=4 QPSK link and one compiled instance."""

import numpy as np
import pytest

from app.core.gsm import ApCodebook, GsmConfig, build_ap_codebook, synthesize
from app.core.mld_encoder import MldProblem, build_objective


@pytest.fixture
def reference_link() -> GsmConfig:
    return GsmConfig(n_tx=4, n_rx=4, k_active=3, q_aps=4, constellation="QPSK", snr_db=0.0)


@pytest.fixture
def reference_codebook() -> ApCodebook:
    return build_ap_codebook(4, 3, 4, "cyclic")


@pytest.fixture
def reference_problem(reference_link: GsmConfig, reference_codebook: ApCodebook) -> MldProblem:
    """Seed-0 channel compiled with lambda1 = 15 and 12 fractional bits."""
    _, chan = synthesize(reference_link, reference_codebook, 0)
    return build_objective(chan, reference_link, reference_codebook, 15.0, precision_bits=12)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
