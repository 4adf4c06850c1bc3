"""DQN decision engine for farm photovoltaic investment recommendations."""

from .env import Action, EnvConfig, FarmPvEnv, State
from .mlp import Mlp, init_mlp
from .rl import DqnAgent, EpsilonSchedule, ReplayBuffer, Transition
from .trainer import Checkpoint, TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "Action", "Checkpoint", "DqnAgent", "EnvConfig", "EpsilonSchedule",
    "FarmPvEnv", "Mlp", "ReplayBuffer", "State", "TrainConfig", "Transition",
    "init_mlp", "train", "__version__",
]
