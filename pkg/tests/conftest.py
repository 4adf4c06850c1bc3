import pytest

from pv_advisor.env import EnvConfig
from pv_advisor.trainer import TrainConfig


@pytest.fixture
def tiny_train_config():
    """Seconds-scale config for loop/plumbing tests (not for learning quality)."""
    return TrainConfig(
        episodes=3,
        env=EnvConfig(horizon=4, seed=0),
        batch_size=8,
        buffer_capacity=64,
        log_every=1,
        seed=7,
    )
