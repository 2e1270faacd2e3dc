import pytest

from fermibounce import DimensionlessParams, PotentialSpec


@pytest.fixture
def canonical() -> DimensionlessParams:
    return DimensionlessParams(v0=60.0, kappa=0.5, lambda_mod=0.5, kbar=4.0)


@pytest.fixture
def spec_half() -> PotentialSpec:
    return PotentialSpec(v0=60.0, kappa=0.5, lambda_mod=0.5)


@pytest.fixture
def spec_static() -> PotentialSpec:
    return PotentialSpec(v0=60.0, kappa=0.5, lambda_mod=0.0)
