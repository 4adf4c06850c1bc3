"""Decision maps, Q-surfaces, the expected-reward oracle and the tabular
baseline, each checked against independent references."""
import dataclasses
import json

import numpy as np
import pytest
from oracle_helpers import FixtureMdp

from pv_advisor.env import (Action, EnvConfig, FarmPvEnv, State,
                            effective_cost, pv_generation, reward)
from pv_advisor.report import (AxisSpec, GridSpec, QTable, decision_map,
                               expected_reward, oracle_policy,
                               policy_agreement, q_surface, recommend,
                               tabular_q_update, write_decision_map_csv,
                               write_q_surface_json)
from pv_advisor.trainer import (TrainConfig, agent_from_checkpoint,
                                load_checkpoint, save_checkpoint, train)


def small_agent(seed=0):
    """An untrained frozen agent: report operations only read Q-values."""
    cfg = TrainConfig(episodes=1, env=EnvConfig(horizon=1, seed=0),
                      batch_size=128, buffer_capacity=128, seed=seed)
    ckpt, _ = train(cfg)
    return agent_from_checkpoint(ckpt), ckpt


class TestGridSpec:
    def test_states_row_major_order(self):
        grid = GridSpec(AxisSpec(0, 1, 2), AxisSpec(0, 10, 2), AxisSpec(5, 5, 1))
        states = grid.states()
        assert [s.farm_load for s in states] == [0, 0, 1, 1]
        assert [s.incentives for s in states] == [0, 10, 0, 10]
        assert all(s.budget == 5 for s in states)

    def test_fixed_axis_midpoint(self):
        assert AxisSpec(2.0, 4.0, 1).values().tolist() == [3.0]
        assert AxisSpec.fixed(7.0).values().tolist() == [7.0]

    def test_invalid_axis_rejected(self):
        with pytest.raises(ValueError):
            AxisSpec(0, 1, 0)
        with pytest.raises(ValueError):
            AxisSpec(2, 1, 3)

    def test_from_config_size(self):
        grid = GridSpec.from_config(EnvConfig(), points=10)
        assert grid.size() == 1000
        assert len(grid.states()) == 1000


class TestOraclePolicy:
    def test_all_infeasible_means_all_dont_install(self):
        cfg = EnvConfig(budget_range=(0.0, 1000.0), incentive_range=(0.0, 0.0),
                        system_cost=9000.0)
        dmap = oracle_policy(cfg, GridSpec.from_config(cfg, points=5))
        assert all(e.action == Action.DONT_INSTALL for e in dmap.entries)

    def test_zero_capacity_ties_to_dont_install(self):
        cfg = EnvConfig(pv_capacity_kw=0.0)
        dmap = oracle_policy(cfg, GridSpec.from_config(cfg, points=5))
        assert all(e.action == Action.DONT_INSTALL for e in dmap.entries)
        assert all(e.q_dont_install == e.q_install
                   for e in dmap.entries if e.state.budget >=
                   effective_cost(cfg, e.state))

    def test_hand_computed_feasible_case(self):
        cfg = EnvConfig(price_range=(0.1, 0.3), pv_capacity_kw=10.0,
                        capacity_factor_range=(0.1, 0.3), system_cost=8000.0)
        s = State(10.0, 0.0, 9000.0)
        assert expected_reward(cfg, s, Action.DONT_INSTALL) == pytest.approx(-2.0)
        assert expected_reward(cfg, s, Action.INSTALL) == pytest.approx(-1.6)
        grid = GridSpec(AxisSpec.fixed(10.0), AxisSpec.fixed(0.0), AxisSpec.fixed(9000.0))
        dmap = oracle_policy(cfg, grid)
        assert dmap.entries[0].action == Action.INSTALL

    def test_argmax_invariant_under_price_and_penalty_rescale(self):
        base = EnvConfig()
        scaled = dataclasses.replace(
            base,
            price_range=(base.price_range[0] * 3.0, base.price_range[1] * 3.0),
            infeasible_penalty=base.infeasible_penalty * 3.0,
        )
        grid = GridSpec.from_config(base, points=6)
        a = oracle_policy(base, grid)
        b = oracle_policy(scaled, grid)
        assert [e.action for e in a.entries] == [e.action for e in b.entries]

    def test_monte_carlo_matches_closed_form_every_regime(self):
        cfg = EnvConfig(seed=11)
        env = FarmPvEnv(cfg)
        rng = np.random.default_rng(17)
        cases = [
            (State(8.0, 0.0, 0.0), Action.DONT_INSTALL),     # bill only
            (State(8.0, 4000.0, 12000.0), Action.INSTALL),   # feasible
            (State(8.0, 0.0, 100.0), Action.INSTALL),        # infeasible
        ]
        n = 100_000
        prices = rng.uniform(*cfg.price_range, size=n)
        cfs = rng.uniform(*cfg.capacity_factor_range, size=n)
        for state, action in cases:
            samples = [
                reward(state, action, p, pv_generation(cfg, c), cfg)
                for p, c in zip(prices, cfs)
            ]
            closed = expected_reward(cfg, state, action)
            assert abs(np.mean(samples) - closed) <= 0.01 * abs(closed)


class TestDecisionMap:
    def test_single_point_grid_matches_q_values(self):
        agent, ckpt = small_agent()
        cfg = ckpt.config.env
        grid = GridSpec(AxisSpec.fixed(5.0), AxisSpec.fixed(1000.0),
                        AxisSpec.fixed(7000.0))
        dmap = decision_map(agent, grid, cfg)
        assert len(dmap.entries) == 1
        e = dmap.entries[0]
        q = agent.q_values(e.state, cfg)
        assert (e.q_dont_install, e.q_install) == (q[0], q[1])
        assert int(e.action) == int(np.argmax(q))

    def test_reloaded_checkpoint_reproduces_map(self, tmp_path):
        agent, ckpt = small_agent()
        cfg = ckpt.config.env
        grid = GridSpec.from_config(cfg, points=4)
        before = decision_map(agent, grid, cfg)
        path = tmp_path / "ckpt.json"
        save_checkpoint(ckpt, path)
        after = decision_map(agent_from_checkpoint(load_checkpoint(path)), grid, cfg)
        assert before.entries == after.entries

    def test_entries_satisfy_argmax_invariant(self):
        agent, ckpt = small_agent(seed=5)
        grid = GridSpec.from_config(ckpt.config.env, points=5)
        for e in decision_map(agent, grid, ckpt.config.env).entries:
            expected = Action.INSTALL if e.q_install > e.q_dont_install \
                else Action.DONT_INSTALL
            assert e.action == expected

    def test_csv_export_schema(self, tmp_path):
        agent, ckpt = small_agent()
        grid = GridSpec.from_config(ckpt.config.env, points=3)
        dmap = decision_map(agent, grid, ckpt.config.env)
        out = tmp_path / "map.csv"
        write_decision_map_csv(dmap, out)
        lines = out.read_text().splitlines()
        assert lines[0] == "farm_load,incentives,budget,action,q_dont_install,q_install"
        assert len(lines) == 1 + 27
        for line in lines[1:]:
            cells = line.split(",")
            assert [float(c) == float(c) for c in cells]  # plain parseable floats
            assert cells[3] in ("0", "1")


class TestQSurface:
    def test_values_equal_q_values_pointwise(self):
        agent, ckpt = small_agent()
        cfg = ckpt.config.env
        grid = GridSpec(AxisSpec(0, 10, 3), AxisSpec.fixed(2000.0), AxisSpec(0, 12000, 4))
        surface = q_surface(agent, grid, Action.INSTALL, cfg)
        assert surface.values.shape == (3, 4)
        assert surface.slice == {"incentives": 2000.0}
        for i, load in enumerate(surface.axes[0]["values"]):
            for j, budget in enumerate(surface.axes[1]["values"]):
                q = agent.q_values(State(load, 2000.0, budget), cfg)
                assert surface.values[i, j] == q[1]

    def test_three_swept_axes_rejected(self):
        agent, ckpt = small_agent()
        grid = GridSpec.from_config(ckpt.config.env, points=3)
        with pytest.raises(ValueError):
            q_surface(agent, grid, Action.INSTALL, ckpt.config.env)

    def test_surface_difference_sign_matches_decisions(self):
        agent, ckpt = small_agent(seed=2)
        cfg = ckpt.config.env
        grid = GridSpec(AxisSpec(0, 10, 5), AxisSpec.fixed(2000.0), AxisSpec(0, 12000, 5))
        install = q_surface(agent, grid, Action.INSTALL, cfg)
        dont = q_surface(agent, grid, Action.DONT_INSTALL, cfg)
        dmap = decision_map(agent, grid, cfg)
        diff = (install.values - dont.values).reshape(-1)
        for d, e in zip(diff, dmap.entries):
            if d > 0:
                assert e.action == Action.INSTALL
            else:
                assert e.action == Action.DONT_INSTALL

    def test_json_export_schema(self, tmp_path):
        agent, ckpt = small_agent()
        cfg = ckpt.config.env
        grid = GridSpec(AxisSpec(0, 10, 3), AxisSpec.fixed(2000.0), AxisSpec(0, 12000, 4))
        out = tmp_path / "surface.json"
        write_q_surface_json(q_surface(agent, grid, Action.INSTALL, cfg), out)
        doc = json.loads(out.read_text())
        assert set(doc) == {"axes", "slice", "action", "values"}
        assert doc["action"] == "Install"
        assert len(doc["values"]) == 12


class TestPolicyAgreement:
    def test_self_agreement_is_one(self):
        cfg = EnvConfig()
        dmap = oracle_policy(cfg, GridSpec.from_config(cfg, points=4))
        assert policy_agreement(dmap, dmap) == 1.0

    def test_flipped_copy_is_zero(self):
        cfg = EnvConfig()
        dmap = oracle_policy(cfg, GridSpec.from_config(cfg, points=4))
        flipped = dataclasses.replace(
            dmap,
            entries=[dataclasses.replace(e, action=Action(1 - int(e.action)))
                     for e in dmap.entries],
        )
        assert policy_agreement(dmap, flipped) == 0.0

    def test_grid_mismatch_rejected(self):
        cfg = EnvConfig()
        a = oracle_policy(cfg, GridSpec.from_config(cfg, points=4))
        b = oracle_policy(cfg, GridSpec.from_config(cfg, points=5))
        with pytest.raises(ValueError):
            policy_agreement(a, b)


class TestTabularQ:
    def test_terminal_update_hand_arithmetic(self):
        table = QTable(2)
        tabular_q_update(table, 0, 0, 1.0, 1, True, 0.5, 0.9)
        assert table.values[0, 0] == 0.5

    def test_full_step_terminal_sets_reward(self):
        table = QTable(2)
        tabular_q_update(table, 0, 1, -3.0, 1, True, 1.0, 0.9)
        assert table.values[0, 1] == -3.0

    def test_zero_step_size_is_noop(self):
        table = QTable(2)
        table.values[:] = 7.0
        tabular_q_update(table, 0, 0, 5.0, 1, False, 0.0, 0.9)
        assert np.all(table.values == 7.0)

    def test_invalid_bin_rejected(self):
        with pytest.raises(ValueError):
            tabular_q_update(QTable(2), 2, 0, 0.0, 0, False, 0.1, 0.9)
        with pytest.raises(ValueError):
            tabular_q_update(QTable(2), 0, 5, 0.0, 0, False, 0.1, 0.9)

    def test_converges_to_value_iteration_fixed_point(self):
        gamma, step_size = 0.9, 0.1
        q_star = FixtureMdp.value_iteration(gamma)
        table = QTable(2)
        pairs = [(s, a) for s in range(2) for a in range(2)]
        for i in range(10_000):
            s, a = pairs[i % 4]
            s_next = FixtureMdp.next_state[s][a]
            r = FixtureMdp.rewards[s][a]
            tabular_q_update(table, s, a, r, s_next, False, step_size, gamma)
        assert np.abs(table.values - q_star).max() < 1e-3

    def test_state_bin_indexing(self):
        cfg = EnvConfig()
        table = QTable.from_config(cfg, bins_per_axis=10)
        assert table.values.shape == (1000, 2)
        assert table.state_bin(State(0.0, 0.0, 0.0)) == 0
        assert table.state_bin(State(10.0, 4000.0, 12000.0)) == 999
        assert table.state_bin(State(5.0, 2000.0, 6000.0)) == 555


class TestRecommend:
    def test_payload_shape_and_consistency(self):
        agent, ckpt = small_agent()
        cfg = ckpt.config.env
        result = recommend(agent, cfg, 5.0, 1000.0, 8000.0)
        assert set(result) == {"action", "q_dont_install", "q_install"}
        q = agent.q_values(State(5.0, 1000.0, 8000.0), cfg)
        assert result["q_dont_install"] == q[0]
        assert result["q_install"] == q[1]
        expected = "Install" if q[1] > q[0] else "Don't Install"
        assert result["action"] == expected
