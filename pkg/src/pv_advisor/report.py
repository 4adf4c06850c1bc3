"""Evaluation and verification over a frozen agent.

Because scenario transitions are action-independent i.i.d. redraws, the
greedy one-step policy is optimal for any discount, so the closed-form
expected one-step reward gives an exact ground-truth policy
(oracle_policy) to compare decision maps against. A tabular Q-learning
update is kept alongside as a second, table-based reference learner.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .env import Action, EnvConfig, State, effective_cost, normalize_state

AXIS_NAMES = ("farm_load", "incentives", "budget")


@dataclass(frozen=True)
class AxisSpec:
    """One state variable's grid: count points evenly spaced on [lo, hi]."""

    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"axis needs at least 1 point, got {self.count}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise ValueError(f"axis range invalid: [{self.lo}, {self.hi}]")

    @classmethod
    def fixed(cls, value: float) -> "AxisSpec":
        return cls(value, value, 1)

    @property
    def swept(self) -> bool:
        return self.count > 1

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([(self.lo + self.hi) / 2.0])
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class GridSpec:
    """Grid over (farm_load, incentives, budget); points iterate row-major
    with farm_load outermost and budget innermost."""

    load: AxisSpec
    incentives: AxisSpec
    budget: AxisSpec

    @classmethod
    def from_config(cls, cfg: EnvConfig, points: int = 10) -> "GridSpec":
        return cls(
            load=AxisSpec(*cfg.load_range, points),
            incentives=AxisSpec(*cfg.incentive_range, points),
            budget=AxisSpec(*cfg.budget_range, points),
        )

    @property
    def axes(self) -> tuple[AxisSpec, AxisSpec, AxisSpec]:
        return (self.load, self.incentives, self.budget)

    def size(self) -> int:
        return self.load.count * self.incentives.count * self.budget.count

    def states(self) -> list[State]:
        return [
            State(farm_load=float(l), incentives=float(i), budget=float(b))
            for l in self.load.values()
            for i in self.incentives.values()
            for b in self.budget.values()
        ]


@dataclass(frozen=True)
class DecisionEntry:
    state: State
    action: Action
    q_dont_install: float
    q_install: float


@dataclass
class DecisionMap:
    grid: GridSpec
    entries: list


def expected_reward(cfg: EnvConfig, state: State, action: Action) -> float:
    """Closed-form E[reward] under the uniform sampling model."""
    mean_price = sum(cfg.price_range) / 2.0
    if action == Action.DONT_INSTALL:
        return -mean_price * state.farm_load
    mean_pv = cfg.pv_capacity_kw * sum(cfg.capacity_factor_range) / 2.0
    if state.budget >= effective_cost(cfg, state):
        return -mean_price * (state.farm_load - mean_pv)
    return -mean_price * state.farm_load - cfg.infeasible_penalty


def oracle_policy(cfg: EnvConfig, grid: GridSpec) -> DecisionMap:
    """Exact argmax of expected one-step reward, tie toward DontInstall."""
    entries = []
    for s in grid.states():
        q_dont = expected_reward(cfg, s, Action.DONT_INSTALL)
        q_install = expected_reward(cfg, s, Action.INSTALL)
        action = Action.INSTALL if q_install > q_dont else Action.DONT_INSTALL
        entries.append(DecisionEntry(s, action, q_dont, q_install))
    return DecisionMap(grid=grid, entries=entries)


def decision_map(agent, grid: GridSpec, cfg: EnvConfig) -> DecisionMap:
    """Greedy action and both Q-values at every grid state (read-only)."""
    states = grid.states()
    inputs = np.stack([normalize_state(s, cfg) for s in states])
    q = agent.network.predict(inputs)
    actions = np.argmax(q, axis=1)  # first max wins: tie -> DontInstall
    entries = [
        DecisionEntry(s, Action(int(a)), float(row[0]), float(row[1]))
        for s, a, row in zip(states, actions, q)
    ]
    return DecisionMap(grid=grid, entries=entries)


@dataclass
class QSurface:
    """Q(s, action) sampled on a 2-D slice of the state space."""

    axes: list  # two of {"name", "values"} dicts, row-major order
    slice: dict  # the held-out variable's name -> fixed value
    action: Action
    values: np.ndarray  # shape (len(axes[0]), len(axes[1]))


def q_surface(agent, grid: GridSpec, action: Action, cfg: EnvConfig) -> QSurface:
    """Evaluate one action's Q over a grid with exactly 2 swept variables."""
    swept = [i for i, ax in enumerate(grid.axes) if ax.swept]
    if len(swept) != 2:
        raise ValueError(
            f"q_surface needs exactly 2 swept variables, got {len(swept)}"
        )
    fixed = next(i for i in range(3) if i not in swept)
    dmap = decision_map(agent, grid, cfg)
    column = [e.q_install if action == Action.INSTALL else e.q_dont_install
              for e in dmap.entries]
    shape = tuple(grid.axes[i].count for i in range(3))
    cube = np.array(column).reshape(shape)
    values = np.moveaxis(cube, fixed, -1)[..., 0]
    return QSurface(
        axes=[{"name": AXIS_NAMES[i], "values": grid.axes[i].values().tolist()}
              for i in swept],
        slice={AXIS_NAMES[fixed]: float(grid.axes[fixed].values()[0])},
        action=action,
        values=values,
    )


def policy_agreement(a: DecisionMap, b: DecisionMap) -> float:
    """Fraction of grid points whose chosen actions match."""
    if a.grid != b.grid or len(a.entries) != len(b.entries):
        raise ValueError("decision maps were built on different grids")
    if not a.entries:
        raise ValueError("empty decision maps")
    same = sum(1 for x, y in zip(a.entries, b.entries) if x.action == y.action)
    return same / len(a.entries)


class QTable:
    """Flat table of Q-values over discretized state bins.

    Holds (n_states, n_actions) values initialized to zero, plus optional
    per-variable bin edges when the table discretizes environment states.
    """

    def __init__(self, n_states: int, n_actions: int = 2, bin_edges=None):
        if n_states < 1 or n_actions < 1:
            raise ValueError("table needs at least one state and action")
        self.values = np.zeros((n_states, n_actions))
        self.bin_edges = bin_edges

    @classmethod
    def from_config(cls, cfg: EnvConfig, bins_per_axis: int = 10) -> "QTable":
        edges = [
            np.linspace(lo, hi, bins_per_axis + 1)
            for lo, hi in (cfg.load_range, cfg.incentive_range, cfg.budget_range)
        ]
        return cls(bins_per_axis**3, 2, bin_edges=edges)

    def state_bin(self, state: State) -> int:
        """Row-major flat bin index of a state; needs bin_edges."""
        if self.bin_edges is None:
            raise ValueError("this table has no bin edges")
        idx = 0
        for edges, v in zip(self.bin_edges, (state.farm_load, state.incentives,
                                             state.budget)):
            n_bins = len(edges) - 1
            k = int(np.searchsorted(edges, v, side="right")) - 1
            k = min(max(k, 0), n_bins - 1)
            idx = idx * n_bins + k
        return idx


def tabular_q_update(table: QTable, s_bin: int, a: int, r: float, s_next_bin: int,
                     done: bool, step_size: float, gamma: float) -> None:
    """Classic one-step tabular Q-learning update, in place.

    Q(s,a) += step_size * (r + gamma * max_a' Q(s',a') - Q(s,a)), with the
    bootstrap dropped on terminal transitions. step_size 0 is a no-op.
    """
    n_states, n_actions = table.values.shape
    if not (0 <= s_bin < n_states and 0 <= s_next_bin < n_states):
        raise ValueError(f"state bin out of range for {n_states} states")
    if not 0 <= a < n_actions:
        raise ValueError(f"action {a} out of range for {n_actions} actions")
    if not 0.0 <= step_size <= 1.0:
        raise ValueError(f"step_size must be in [0, 1], got {step_size}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    bootstrap = 0.0 if done else gamma * table.values[s_next_bin].max()
    table.values[s_bin, a] += step_size * (r + bootstrap - table.values[s_bin, a])


def recommend(agent, cfg: EnvConfig, farm_load: float, incentives: float,
              budget: float) -> dict:
    """Single evaluation path shared by the CLI and the HTTP API."""
    state = State(farm_load=farm_load, incentives=incentives, budget=budget)
    q = agent.q_values(state, cfg)
    action = Action(int(np.argmax(q)))
    return {
        "action": action.label,
        "q_dont_install": float(q[0]),
        "q_install": float(q[1]),
    }


def write_decision_map_csv(dmap: DecisionMap, path) -> None:
    """CSV export: farm_load,incentives,budget,action,q_dont_install,q_install
    with the action as its stable integer code (0 = Don't Install)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["farm_load", "incentives", "budget", "action",
                         "q_dont_install", "q_install"])
        for e in dmap.entries:
            writer.writerow([
                repr(e.state.farm_load), repr(e.state.incentives),
                repr(e.state.budget), int(e.action),
                repr(e.q_dont_install), repr(e.q_install),
            ])


def surface_to_doc(surface: QSurface) -> dict:
    return {
        "axes": surface.axes,
        "slice": surface.slice,
        "action": surface.action.label,
        "values": surface.values.reshape(-1).tolist(),
    }


def write_q_surface_json(surface: QSurface, path) -> None:
    """JSON export: axes, slice, action and row-major values."""
    Path(path).write_text(json.dumps(surface_to_doc(surface), indent=2) + "\n")
