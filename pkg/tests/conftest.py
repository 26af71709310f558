import hypothesis
import numpy as np
import pytest

from odl.config import resolve_config
from odl.experiments import run

hypothesis.settings.register_profile(
    "odl", max_examples=60, derandomize=True, deadline=None
)
hypothesis.settings.load_profile("odl")


@pytest.fixture(scope="session")
def rotation_qd_run():
    """One shared seeded rotation-QD sweep (the acceptance-6 configuration)."""
    cfg = resolve_config("rotation-qd", {})
    return run(cfg)


@pytest.fixture(scope="session")
def glasner_run():
    cfg = resolve_config("glasner-dilation", {})
    return run(cfg)


@pytest.fixture(scope="session")
def iet_qd_run():
    cfg = resolve_config("iet-qd", {})
    return run(cfg)


@pytest.fixture(scope="session")
def pair_qd_run():
    cfg = resolve_config("pair-qd", {})
    return run(cfg)


@pytest.fixture(scope="session")
def counterexample_run():
    cfg = resolve_config("rotation-counterexample", {})
    return run(cfg)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
