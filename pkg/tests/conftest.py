import pytest
from hypothesis import HealthCheck, settings

from restoreval.catalog import load_manifest
from restoreval.synth import FixtureConfig, generate_fixture

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def mini_study(tmp_path_factory):
    """Small end-to-end fixture shared by protocol and CLI tests."""
    root = tmp_path_factory.mktemp("mini_study")
    manifest = generate_fixture(
        root, FixtureConfig(subjects=2, frames=48, size=64, takes=2, seed=1)
    )
    return manifest


@pytest.fixture(scope="session")
def mini_catalog(mini_study):
    return load_manifest(mini_study)
