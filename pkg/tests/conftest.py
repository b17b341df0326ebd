import os
import tempfile

# the settings singleton configures its log sink at import time
os.environ["LOG_FILE"] = os.path.join(tempfile.mkdtemp(prefix="qkdhydro-tests-"), "qkdhydro.log")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from qkdhydro.schema import DetectorModel, FiberLink, Scenario, SimulationConfig  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def detector() -> DetectorModel:
    return DetectorModel()


@pytest.fixture
def link() -> FiberLink:
    return FiberLink()


@pytest.fixture
def config() -> SimulationConfig:
    return SimulationConfig()


@pytest.fixture
def quiet_scenario() -> Scenario:
    """Short lossless-ish link without vibration, enough detections for a key."""
    return Scenario(
        link=FiberLink(length_km=1.0),
        detector=DetectorModel(efficiency=0.5),
        simulation=SimulationConfig(p_signal=0.5, p_decoy=0.3, p_vacuum=0.2),
        postproc={"leak_source": "analytic"},
    )
