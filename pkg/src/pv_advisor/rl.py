"""DQN agent: replay memory, exploration schedule and the learning step.

The agent keeps a single online network. Bellman targets
r + gamma * max_a Q(s', a) are computed with that same network but treated
as constants (semi-gradient): no gradient flows through the bootstrap term.
Terminal transitions drop the bootstrap entirely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import Action, EnvConfig, State, normalize_state
from .mlp import Mlp, masked_q_loss


class ReplayNotReady(Exception):
    """Raised by sample() when the buffer holds fewer than batch_size items."""


@dataclass(frozen=True)
class Transition:
    """One experience tuple; states are stored normalized into [0, 1]^3."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class ReplayBuffer:
    """FIFO ring of transitions; inserting at capacity evicts the oldest."""

    def __init__(self, capacity: int):
        if int(capacity) < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self._storage: list[Transition] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._storage)

    def store(self, t: Transition) -> None:
        if len(self._storage) < self.capacity:
            self._storage.append(t)
        else:
            self._storage[self._next] = t
        self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        """Uniform sample without replacement, deterministic given rng state."""
        if batch_size > len(self._storage):
            raise ReplayNotReady(
                f"buffer holds {len(self._storage)} transitions, need {batch_size}"
            )
        idx = rng.choice(len(self._storage), size=batch_size, replace=False)
        return [self._storage[i] for i in idx]


class EpsilonSchedule:
    """Exploration probability max(floor, base^n) over total env steps n.

    Evaluated in the log domain so huge step counts do not underflow
    prematurely. Monotonically non-increasing; defaults decay 1.0 -> 0.01.
    """

    def __init__(self, base: float = 0.99999, floor: float = 0.01, n_i: int = 0):
        if not 0.0 < base <= 1.0:
            raise ValueError(f"base must be in (0, 1], got {base}")
        if not 0.0 <= floor <= 1.0:
            raise ValueError(f"floor must be in [0, 1], got {floor}")
        self.base = base
        self.floor = floor
        self.n_i = int(n_i)

    def value(self) -> float:
        return max(self.floor, math.exp(self.n_i * math.log(self.base)))

    def step(self, k: int = 1) -> None:
        self.n_i += k


class DqnAgent:
    """Mutable during training; freeze() it for concurrent read-only use."""

    def __init__(self, network: Mlp, buffer: ReplayBuffer, schedule: EpsilonSchedule,
                 gamma: float = 0.99, learning_rate: float = 0.1, batch_size: int = 128):
        if network.output_dim != 2:
            raise ValueError(f"network must output 2 Q-values, got {network.output_dim}")
        if not 0.0 <= gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {gamma}")
        self.network = network
        self.buffer = buffer
        self.schedule = schedule
        self.gamma = gamma
        self.learning_rate = learning_rate
        self.batch_size = int(batch_size)

    def select_action(self, state, rng: np.random.Generator,
                      epsilon: float | None = None) -> Action:
        """Epsilon-greedy over the two Q-values of a normalized state.

        epsilon=None reads the schedule; pass 0.0 for the pure greedy
        policy. An exact Q tie breaks toward DontInstall.
        """
        eps = self.schedule.value() if epsilon is None else epsilon
        if eps > 0 and rng.random() < eps:
            return Action(int(rng.integers(0, 2)))
        q = self.network.predict(np.asarray(state, dtype=np.float64))
        return Action(int(np.argmax(q)))  # argmax takes the first max: tie -> 0

    def q_values(self, state: State, cfg: EnvConfig) -> np.ndarray:
        """[Q(DontInstall), Q(Install)] for a raw (unnormalized) state."""
        return self.network.predict(normalize_state(state, cfg))

    def train_step(self, batch: list[Transition]) -> float:
        """One squared-Bellman-error SGD update on a replay batch."""
        if not batch:
            raise ValueError("empty batch")
        states = np.stack([t.state for t in batch])
        next_states = np.stack([t.next_state for t in batch])
        actions = np.array([t.action for t in batch], dtype=np.intp)
        rewards = np.array([t.reward for t in batch])
        live = np.array([0.0 if t.done else 1.0 for t in batch])

        next_q = self.network.predict(next_states)
        targets = rewards + self.gamma * next_q.max(axis=1) * live
        predicted, cache = self.network.forward(states)
        loss, output_grads = masked_q_loss(predicted, actions, targets)
        grads = self.network.backward(cache, output_grads)
        self.network.sgd_step(grads, self.learning_rate)
        return loss
