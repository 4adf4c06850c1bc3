"""Training loop, episode accounting and checkpoint persistence.

train() runs the classic single-network DQN loop: reset, epsilon-greedy
action, environment step, store transition, sample a batch once the buffer
is warm, one SGD update, repeat for a fixed number of episodes. The master
seed fans out into independent streams for weight init, the environment,
exploration and batch sampling, so a (config, seed) pair fully determines
the training log and the final weights.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .env import Action, EnvConfig, FarmPvEnv, normalize_state
from .mlp import Activation, DenseLayer, Mlp, init_mlp
from .rl import DqnAgent, EpsilonSchedule, ReplayBuffer, Transition

CHECKPOINT_VERSION = 1


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss; carries the episode and step."""

    def __init__(self, episode: int, step: int, loss: float):
        super().__init__(f"non-finite loss {loss} at episode {episode}, step {step}")
        self.episode = episode
        self.step = step
        self.loss = loss

    def __reduce__(self):
        return (DivergenceError, (self.episode, self.step, self.loss))


class CheckpointError(Exception):
    pass


class MalformedCheckpointError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


@dataclass
class TrainConfig:
    episodes: int = 500
    env: EnvConfig = field(default_factory=EnvConfig)
    batch_size: int = 128
    learning_rate: float = 0.1
    hidden_layers: tuple = (32, 32)
    gamma: float = 0.99
    buffer_capacity: int = 10000
    epsilon_base: float = 0.99999
    epsilon_floor: float = 0.01
    log_every: int = 50
    seed: int = 42

    def validate(self) -> None:
        if int(self.episodes) < 1:
            raise ValueError(f"episodes must be >= 1, got {self.episodes}")
        if int(self.batch_size) < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not self.hidden_layers or any(int(h) < 1 for h in self.hidden_layers):
            raise ValueError(f"hidden_layers must be positive, got {self.hidden_layers}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if int(self.buffer_capacity) < int(self.batch_size):
            raise ValueError("buffer_capacity must be >= batch_size")
        if int(self.log_every) < 1:
            raise ValueError(f"log_every must be >= 1, got {self.log_every}")
        self.env.validate()


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    total_reward: float
    discounted_return: float
    mean_loss: float | None
    epsilon: float
    steps: int


@dataclass(frozen=True)
class StepEvent:
    """Trajectory tap emitted to on_step, mainly for tests and debugging."""

    episode: int
    step: int
    state: object
    action: Action
    reward: float
    next_state: object
    done: bool
    loss: float | None


@dataclass
class Checkpoint:
    format_version: int
    config: TrainConfig
    layers: list
    n_i: int
    total_steps: int
    rng_state: dict | None = None


def discounted_return(rewards, gamma: float) -> float:
    """Sum of gamma^t * r_t over the episode."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    total, g = 0.0, 1.0
    for r in rewards:
        total += g * r
        g *= gamma
    return total


def derive_seeds(master_seed: int) -> dict:
    """Fan the master seed out into independent per-component streams."""
    words = np.random.SeedSequence(master_seed).generate_state(4, dtype=np.uint64)
    return {
        "weights": int(words[0]),
        "env": int(words[1]),
        "exploration": int(words[2]),
        "sampling": int(words[3]),
    }


def train(cfg: TrainConfig, on_step=None, on_episode=None):
    """Run the full episode loop; returns (Checkpoint, [EpisodeRecord]).

    Raises DivergenceError as soon as a training loss goes non-finite
    rather than continuing with NaN weights.
    """
    cfg.validate()
    seeds = derive_seeds(cfg.seed)
    network = init_mlp(3, list(cfg.hidden_layers), 2, seeds["weights"])
    env = FarmPvEnv(dataclasses.replace(cfg.env, seed=seeds["env"]))
    explore_rng = np.random.default_rng(seeds["exploration"])
    sample_rng = np.random.default_rng(seeds["sampling"])
    agent = DqnAgent(
        network=network,
        buffer=ReplayBuffer(cfg.buffer_capacity),
        schedule=EpsilonSchedule(cfg.epsilon_base, cfg.epsilon_floor),
        gamma=cfg.gamma,
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
    )

    records = []
    total_steps = 0
    for episode in range(1, cfg.episodes + 1):
        state = env.reset()
        rewards = []
        losses = []
        done = False
        step = 0
        while not done:
            x = normalize_state(state, env.cfg)
            action = agent.select_action(x, explore_rng)
            outcome = env.step(action)
            agent.buffer.store(Transition(
                state=x,
                action=int(action),
                reward=outcome.reward,
                next_state=normalize_state(outcome.next_state, env.cfg),
                done=outcome.done,
            ))
            loss = None
            if len(agent.buffer) >= cfg.batch_size:
                batch = agent.buffer.sample(cfg.batch_size, sample_rng)
                loss = agent.train_step(batch)
                if not math.isfinite(loss):
                    raise DivergenceError(episode, step, loss)
                losses.append(loss)
            agent.schedule.step()
            total_steps += 1
            rewards.append(outcome.reward)
            if on_step is not None:
                on_step(StepEvent(episode, step, state, action, outcome.reward,
                                  outcome.next_state, outcome.done, loss))
            state = outcome.next_state
            done = outcome.done
            step += 1
        record = EpisodeRecord(
            episode=episode,
            total_reward=sum(rewards),
            discounted_return=discounted_return(rewards, cfg.gamma),
            mean_loss=sum(losses) / len(losses) if losses else None,
            epsilon=agent.schedule.value(),
            steps=len(rewards),
        )
        records.append(record)
        if on_episode is not None:
            on_episode(record)

    checkpoint = Checkpoint(
        format_version=CHECKPOINT_VERSION,
        config=cfg,
        layers=[{
            "rows": layer.out_dim,
            "cols": layer.in_dim,
            "weights": layer.weights.reshape(-1).tolist(),
            "bias": layer.bias.tolist(),
            "activation": layer.activation.value,
        } for layer in network.layers],
        n_i=agent.schedule.n_i,
        total_steps=total_steps,
        rng_state={
            "env": env._rng.bit_generator.state,
            "exploration": explore_rng.bit_generator.state,
            "sampling": sample_rng.bit_generator.state,
        },
    )
    return checkpoint, records


def _config_to_dict(cfg: TrainConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["hidden_layers"] = list(cfg.hidden_layers)
    for key in ("load_range", "incentive_range", "budget_range", "price_range",
                "capacity_factor_range"):
        d["env"][key] = list(d["env"][key])
    return d


def _config_from_dict(d: dict) -> TrainConfig:
    env_d = dict(d["env"])
    for key in ("load_range", "incentive_range", "budget_range", "price_range",
                "capacity_factor_range"):
        env_d[key] = tuple(env_d[key])
    return TrainConfig(
        episodes=d["episodes"],
        env=EnvConfig(**env_d),
        batch_size=d["batch_size"],
        learning_rate=d["learning_rate"],
        hidden_layers=tuple(d["hidden_layers"]),
        gamma=d["gamma"],
        buffer_capacity=d["buffer_capacity"],
        epsilon_base=d["epsilon_base"],
        epsilon_floor=d["epsilon_floor"],
        log_every=d["log_every"],
        seed=d["seed"],
    )


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    """Write the checkpoint as versioned JSON; floats round-trip losslessly."""
    doc = {
        "format_version": ckpt.format_version,
        "config": _config_to_dict(ckpt.config),
        "layers": ckpt.layers,
        "n_i": ckpt.n_i,
        "total_steps": ckpt.total_steps,
        "rng_state": ckpt.rng_state,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_checkpoint(path) -> Checkpoint:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"checkpoint not found: {p}")
    try:
        doc = json.loads(p.read_text())
        version = doc["format_version"]
    except (json.JSONDecodeError, KeyError, TypeError, UnicodeDecodeError) as e:
        raise MalformedCheckpointError(f"cannot parse checkpoint {p}: {e}") from e
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint {p} has format_version {version}, expected {CHECKPOINT_VERSION}"
        )
    try:
        cfg = _config_from_dict(doc["config"])
        layers = doc["layers"]
        for layer in layers:
            if len(layer["weights"]) != layer["rows"] * layer["cols"]:
                raise ValueError(
                    f"layer data length {len(layer['weights'])} != "
                    f"{layer['rows']}x{layer['cols']}"
                )
            if len(layer["bias"]) != layer["rows"]:
                raise ValueError("bias length does not match rows")
        return Checkpoint(
            format_version=version,
            config=cfg,
            layers=layers,
            n_i=doc["n_i"],
            total_steps=doc["total_steps"],
            rng_state=doc.get("rng_state"),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedCheckpointError(f"invalid checkpoint {p}: {e}") from e


def network_from_checkpoint(ckpt: Checkpoint) -> Mlp:
    layers = []
    for spec in ckpt.layers:
        weights = np.array(spec["weights"], dtype=np.float64).reshape(
            spec["rows"], spec["cols"]
        )
        bias = np.array(spec["bias"], dtype=np.float64)
        layers.append(DenseLayer(weights, bias, Activation(spec["activation"])))
    return Mlp(layers)


def agent_from_checkpoint(ckpt: Checkpoint) -> DqnAgent:
    """Rebuild a frozen agent for inference and reporting."""
    cfg = ckpt.config
    return DqnAgent(
        network=network_from_checkpoint(ckpt),
        buffer=ReplayBuffer(cfg.buffer_capacity),
        schedule=EpsilonSchedule(cfg.epsilon_base, cfg.epsilon_floor, n_i=ckpt.n_i),
        gamma=cfg.gamma,
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
    )


LOG_HEADER = ["episode", "total_reward", "discounted_return", "mean_loss",
              "epsilon", "steps"]


def write_training_log(records, path) -> None:
    """CSV log, one row per episode; mean_loss is empty before warmup."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(LOG_HEADER)
        for r in records:
            writer.writerow([
                r.episode,
                repr(r.total_reward),
                repr(r.discounted_return),
                "" if r.mean_loss is None else repr(r.mean_loss),
                repr(r.epsilon),
                r.steps,
            ])


def read_training_log(path) -> list[EpisodeRecord]:
    records = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != LOG_HEADER:
            raise ValueError(f"unexpected log header in {path}: {reader.fieldnames}")
        for row in reader:
            records.append(EpisodeRecord(
                episode=int(row["episode"]),
                total_reward=float(row["total_reward"]),
                discounted_return=float(row["discounted_return"]),
                mean_loss=float(row["mean_loss"]) if row["mean_loss"] else None,
                epsilon=float(row["epsilon"]),
                steps=int(row["steps"]),
            ))
    return records
