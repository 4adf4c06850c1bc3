"""Experiment configuration: one JSON document for a whole run.

The file unions the training hyperparameters, the environment model and
the default report grid. Unknown keys are rejected rather than ignored so
typos cannot silently fall back to defaults.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .env import EnvConfig
from .trainer import TrainConfig

ENV_KEYS = {f.name for f in dataclasses.fields(EnvConfig)}
TRAIN_KEYS = {f.name for f in dataclasses.fields(TrainConfig)} - {"env"}
GRID_KEYS = {"load_points", "incentive_points", "budget_points"}
TOP_KEYS = TRAIN_KEYS | {"env", "grid"}

RANGE_KEYS = ("load_range", "incentive_range", "budget_range", "price_range",
              "capacity_factor_range")


class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


@dataclass
class ExperimentConfig:
    train: TrainConfig
    grid_points: tuple = (10, 10, 10)


def default_experiment_config() -> ExperimentConfig:
    return ExperimentConfig(train=TrainConfig())


def _reject_unknown(given: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(given) - allowed)
    if unknown:
        raise ConfigError(f"unknown {where} key(s): {', '.join(unknown)}")


def experiment_config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be an object, got {type(doc).__name__}")
    _reject_unknown(doc, TOP_KEYS, "config")

    env_doc = doc.get("env", {})
    if not isinstance(env_doc, dict):
        raise ConfigError("'env' must be an object")
    _reject_unknown(env_doc, ENV_KEYS, "env")
    env_kwargs = dict(env_doc)
    for key in RANGE_KEYS:
        if key in env_kwargs:
            pair = env_kwargs[key]
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(f"env.{key} must be a [min, max] pair, got {pair!r}")
            env_kwargs[key] = (float(pair[0]), float(pair[1]))
    env = EnvConfig(**env_kwargs)

    grid_doc = doc.get("grid", {})
    if not isinstance(grid_doc, dict):
        raise ConfigError("'grid' must be an object")
    _reject_unknown(grid_doc, GRID_KEYS, "grid")
    grid_points = (
        int(grid_doc.get("load_points", 10)),
        int(grid_doc.get("incentive_points", 10)),
        int(grid_doc.get("budget_points", 10)),
    )
    if any(p < 1 for p in grid_points):
        raise ConfigError(f"grid points must be >= 1, got {grid_points}")

    train_kwargs = {k: v for k, v in doc.items() if k in TRAIN_KEYS}
    if "hidden_layers" in train_kwargs:
        train_kwargs["hidden_layers"] = tuple(int(h) for h in train_kwargs["hidden_layers"])
    train = TrainConfig(env=env, **train_kwargs)
    try:
        train.validate()
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return ExperimentConfig(train=train, grid_points=grid_points)


def load_experiment_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot parse config {p}: {e}") from e
    return experiment_config_from_dict(doc)


def experiment_config_to_dict(cfg: ExperimentConfig) -> dict:
    t = cfg.train
    return {
        "episodes": t.episodes,
        "batch_size": t.batch_size,
        "learning_rate": t.learning_rate,
        "hidden_layers": list(t.hidden_layers),
        "gamma": t.gamma,
        "buffer_capacity": t.buffer_capacity,
        "epsilon_base": t.epsilon_base,
        "epsilon_floor": t.epsilon_floor,
        "log_every": t.log_every,
        "seed": t.seed,
        "env": {
            "load_range": list(t.env.load_range),
            "incentive_range": list(t.env.incentive_range),
            "budget_range": list(t.env.budget_range),
            "price_range": list(t.env.price_range),
            "system_cost": t.env.system_cost,
            "pv_capacity_kw": t.env.pv_capacity_kw,
            "capacity_factor_range": list(t.env.capacity_factor_range),
            "infeasible_penalty": t.env.infeasible_penalty,
            "horizon": t.env.horizon,
            "seed": t.env.seed,
        },
        "grid": {
            "load_points": cfg.grid_points[0],
            "incentive_points": cfg.grid_points[1],
            "budget_points": cfg.grid_points[2],
        },
    }


def write_experiment_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(experiment_config_to_dict(cfg), indent=2) + "\n")
