import numpy as np
import pytest

from emgdecode import RunConfig, SynthConfig, generate_tasks

# desk-scale dataset reused across pipeline-level tests: short tasks, small
# crop margins, default spatial layout and noise
SMALL_SYNTH = SynthConfig(seed=123, duration_s=8.0)
SMALL_RUN = RunConfig(crop_s=(0.5, 7.5), seed=3)


@pytest.fixture(scope="session")
def small_tasks():
    return generate_tasks(SMALL_SYNTH)


@pytest.fixture()
def small_config():
    return SMALL_RUN
