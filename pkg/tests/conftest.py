from __future__ import annotations

import numpy as np
import pytest

from mirrorqed.model import DeviceParams, default_device, transition_frequency


@pytest.fixture(scope="session")
def params5() -> DeviceParams:
    return default_device()


@pytest.fixture(scope="session")
def params2() -> DeviceParams:
    base = default_device()
    return DeviceParams(
        e_j_max=base.e_j_max,
        e_c=base.e_c,
        n_levels=2,
        gamma1=base.gamma1,
        gamma_phi=base.gamma_phi,
    )


@pytest.fixture(scope="session")
def w10(params5: DeviceParams) -> float:
    return transition_frequency(params5)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260822)
