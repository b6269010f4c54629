import pytest

from bellsim.config import ExperimentConfig


@pytest.fixture
def make_config():
    """ExperimentConfig factory with sensible defaults for tests."""

    def factory(**overrides) -> ExperimentConfig:
        kwargs = dict(
            model="quantum",
            alice_angles_deg=(0.0, 45.0),
            bob_angles_deg=(22.5, 67.5),
            n_trials=1000,
            seed=12345,
        )
        kwargs.update(overrides)
        return ExperimentConfig(**kwargs)

    return factory
