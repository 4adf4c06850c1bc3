"""Farm-PV investment environment.

Each step is an independent advisory scenario: the investor's situation
(farm load, government incentives, installation budget) is drawn uniformly
from configured ranges, the agent answers Install / Don't Install, and the
reward is the (negative) electricity bill -price * (load - pv_power). PV
output only counts when the install is feasible, i.e. the budget covers the
system cost net of incentives; pursuing an infeasible install costs the
full bill plus a penalty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

ACTION_LABELS = {0: "Don't Install", 1: "Install"}


class Action(IntEnum):
    # integer codes are frozen: checkpoints and CSV exports rely on them
    DONT_INSTALL = 0
    INSTALL = 1

    @property
    def label(self) -> str:
        return ACTION_LABELS[int(self)]


@dataclass(frozen=True)
class State:
    """Investor situation: farm load (kW), incentives and budget (currency)."""

    farm_load: float
    incentives: float
    budget: float

    def __post_init__(self):
        for name in ("farm_load", "incentives", "budget"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def _check_range(name, rng, lo=None, hi=None):
    a, b = rng
    if not (math.isfinite(a) and math.isfinite(b)) or a > b:
        raise ValueError(f"{name} must be a finite (min, max) with min <= max, got {rng}")
    if lo is not None and a < lo:
        raise ValueError(f"{name} minimum must be >= {lo}, got {a}")
    if hi is not None and b > hi:
        raise ValueError(f"{name} maximum must be <= {hi}, got {b}")


@dataclass
class EnvConfig:
    """All stochastic-model parameters, costs, horizon and seed.

    Defaults are chosen so per-step rewards land roughly in [-10, 2],
    which keeps SGD at learning rate 0.1 stable (see config reference in
    the README).
    """

    load_range: tuple = (0.0, 10.0)
    incentive_range: tuple = (0.0, 4000.0)
    budget_range: tuple = (0.0, 12000.0)
    price_range: tuple = (0.1, 0.3)
    system_cost: float = 9000.0
    pv_capacity_kw: float = 10.0
    capacity_factor_range: tuple = (0.2, 0.6)
    infeasible_penalty: float = 5.0
    horizon: int = 24
    seed: int = 0

    def validate(self) -> None:
        _check_range("load_range", self.load_range, lo=0.0)
        _check_range("incentive_range", self.incentive_range, lo=0.0)
        _check_range("budget_range", self.budget_range, lo=0.0)
        _check_range("price_range", self.price_range, lo=0.0)
        _check_range("capacity_factor_range", self.capacity_factor_range, lo=0.0, hi=1.0)
        if self.system_cost < 0 or not math.isfinite(self.system_cost):
            raise ValueError(f"system_cost must be >= 0, got {self.system_cost}")
        if self.pv_capacity_kw < 0 or not math.isfinite(self.pv_capacity_kw):
            raise ValueError(f"pv_capacity_kw must be >= 0, got {self.pv_capacity_kw}")
        if self.infeasible_penalty < 0 or not math.isfinite(self.infeasible_penalty):
            raise ValueError(
                f"infeasible_penalty must be >= 0, got {self.infeasible_penalty}"
            )
        if int(self.horizon) < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")


@dataclass(frozen=True)
class StepOutcome:
    next_state: State
    reward: float
    done: bool


def pv_generation(cfg: EnvConfig, capacity_factor: float) -> float:
    """Nameplate capacity times realized capacity factor, in kW."""
    if not 0.0 <= capacity_factor <= 1.0:
        raise ValueError(f"capacity_factor must be in [0, 1], got {capacity_factor}")
    return cfg.pv_capacity_kw * capacity_factor


def effective_cost(cfg: EnvConfig, state: State) -> float:
    """Installation price net of incentives, clamped at zero."""
    return max(0.0, cfg.system_cost - state.incentives)


def reward(state: State, action: Action, price: float, pv_power: float,
           cfg: EnvConfig) -> float:
    """Immediate reward: -price * (load - pv_power), unclamped.

    DontInstall forces pv_power to 0. An Install whose budget falls short
    of the effective cost deploys nothing and additionally pays the
    configured penalty. PV output above the load yields a positive reward
    (export credit).
    """
    if price < 0 or pv_power < 0 or not (math.isfinite(price) and math.isfinite(pv_power)):
        raise ValueError(f"price and pv_power must be finite and >= 0, got {price}, {pv_power}")
    if action == Action.DONT_INSTALL:
        return -price * state.farm_load
    if state.budget >= effective_cost(cfg, state):
        return -price * (state.farm_load - pv_power)
    return -price * state.farm_load - cfg.infeasible_penalty


def normalize_state(state: State, cfg: EnvConfig) -> np.ndarray:
    """Map each field affinely from its configured range onto [0, 1].

    Out-of-range values clamp to the nearest bound; a degenerate range
    (min == max) maps to 0.5.
    """
    out = np.empty(3)
    ranges = (cfg.load_range, cfg.incentive_range, cfg.budget_range)
    values = (state.farm_load, state.incentives, state.budget)
    for i, ((lo, hi), v) in enumerate(zip(ranges, values)):
        out[i] = 0.5 if hi == lo else min(1.0, max(0.0, (v - lo) / (hi - lo)))
    return out


def denormalize_state(vec, cfg: EnvConfig) -> State:
    """Inverse of normalize_state for in-range, non-degenerate fields."""
    ranges = (cfg.load_range, cfg.incentive_range, cfg.budget_range)
    fields = [lo + float(v) * (hi - lo) for (lo, hi), v in zip(ranges, vec)]
    return State(*fields)


class FarmPvEnv:
    """Stateful episode runner over i.i.d. advisory scenarios.

    Owns a mutable RNG, so an instance is single-threaded; run parallel
    experiments with separate instances and distinct seeds. Per-step draw
    order is fixed (price, capacity factor, then the next state's load,
    incentives, budget) so trajectories are reproducible from the seed.
    """

    def __init__(self, cfg: EnvConfig):
        cfg.validate()
        self.cfg = cfg
        self._rng = np.random.default_rng(cfg.seed)
        self._state = None
        self._steps_taken = 0

    def _sample_state(self) -> State:
        c = self.cfg
        return State(
            farm_load=self._rng.uniform(*c.load_range),
            incentives=self._rng.uniform(*c.incentive_range),
            budget=self._rng.uniform(*c.budget_range),
        )

    def reset(self) -> State:
        """Start a new episode with a freshly sampled initial state."""
        self._state = self._sample_state()
        self._steps_taken = 0
        return self._state

    def step(self, action: Action) -> StepOutcome:
        """Advance one step; raises RuntimeError after the episode is done.

        The action does not alter the next state: scenarios are redrawn
        i.i.d., the action only determines the reward.
        """
        if self._state is None:
            raise RuntimeError("step() before reset()")
        if self._steps_taken >= self.cfg.horizon:
            raise RuntimeError("episode is terminated; call reset()")
        price = self._rng.uniform(*self.cfg.price_range)
        cf = self._rng.uniform(*self.cfg.capacity_factor_range)
        r = reward(self._state, Action(action), price, pv_generation(self.cfg, cf), self.cfg)
        next_state = self._sample_state()
        self._steps_taken += 1
        self._state = next_state
        return StepOutcome(next_state=next_state, reward=r, done=self._steps_taken >= self.cfg.horizon)
