"""Command line entry point.

Subcommands: train, recommend, map, surface, curve, serve. Exit codes are
stable: 0 success, 2 configuration or argument error, 3 training
divergence, 4 port already in use.
"""
from __future__ import annotations

import argparse
import errno
import json
import os
import sys

from .config import (ConfigError, default_experiment_config,
                     load_experiment_config)
from .env import Action
from .report import (GridSpec, decision_map, q_surface, recommend,
                     write_decision_map_csv, write_q_surface_json)
from .server import create_server, grid_from_query
from .trainer import (CheckpointError, DivergenceError, agent_from_checkpoint,
                      load_checkpoint, read_training_log, save_checkpoint,
                      train, write_training_log)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_PORT_IN_USE = 4

CONFIG_ENV_VAR = "PV_ADVISOR_CONFIG"


def _load_config(path: str | None):
    """Resolve --config, then $PV_ADVISOR_CONFIG, then built-in defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return default_experiment_config()
    return load_experiment_config(path)


def cmd_train(args) -> int:
    try:
        experiment = _load_config(args.config)
    except (FileNotFoundError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = experiment.train
    if args.seed is not None:
        cfg.seed = args.seed

    def on_episode(rec):
        if rec.episode % cfg.log_every == 0 or rec.episode == cfg.episodes:
            loss = "-" if rec.mean_loss is None else f"{rec.mean_loss:.4f}"
            print(f"episode {rec.episode:>5}  reward {rec.total_reward:>9.3f}  "
                  f"loss {loss}  epsilon {rec.epsilon:.4f}")

    try:
        checkpoint, records = train(cfg, on_episode=on_episode)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as e:
        print(f"error: training diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    save_checkpoint(checkpoint, args.out)
    write_training_log(records, args.log)
    final = records[-1]
    print(f"done: {len(records)} episodes, final total_reward "
          f"{final.total_reward:.3f}, checkpoint -> {args.out}, log -> {args.log}")
    return EXIT_OK


def _load_agent(ckpt_path):
    checkpoint = load_checkpoint(ckpt_path)
    return agent_from_checkpoint(checkpoint), checkpoint


def cmd_recommend(args) -> int:
    try:
        agent, checkpoint = _load_agent(args.ckpt)
        result = recommend(agent, checkpoint.config.env, args.load,
                           args.incentives, args.budget)
    except (FileNotFoundError, CheckpointError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.json:
        print(json.dumps(result))
    else:
        print(f"action: {result['action']}")
        print(f"q_dont_install: {result['q_dont_install']}")
        print(f"q_install: {result['q_install']}")
    return EXIT_OK


def _grid_from_args(args, env_cfg) -> GridSpec:
    query = {}
    for axis in ("load", "incentives", "budget"):
        for part in ("min", "max", "points", "fixed"):
            v = getattr(args, f"{axis}_{part}")
            if v is not None:
                query[f"{axis}_{part}"] = [str(v)]
    return grid_from_query(query, env_cfg)


def _add_grid_flags(parser) -> None:
    for axis in ("load", "incentives", "budget"):
        parser.add_argument(f"--{axis}-min", type=float, default=None)
        parser.add_argument(f"--{axis}-max", type=float, default=None)
        parser.add_argument(f"--{axis}-points", type=int, default=None)
        parser.add_argument(f"--{axis}-fixed", type=float, default=None,
                            help=f"hold {axis} at one value")


def cmd_map(args) -> int:
    try:
        agent, checkpoint = _load_agent(args.ckpt)
        grid = _grid_from_args(args, checkpoint.config.env)
        dmap = decision_map(agent, grid, checkpoint.config.env)
    except (FileNotFoundError, CheckpointError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    write_decision_map_csv(dmap, args.out)
    print(f"decision map: {len(dmap.entries)} states -> {args.out}")
    return EXIT_OK


def cmd_surface(args) -> int:
    action = Action.INSTALL if args.action == "install" else Action.DONT_INSTALL
    # with no incentives flags the surface slices at the range midpoint,
    # leaving the default load x budget sweep
    fix_incentives = all(getattr(args, f"incentives_{p}") is None
                         for p in ("min", "max", "points", "fixed"))
    try:
        agent, checkpoint = _load_agent(args.ckpt)
        if fix_incentives:
            args.incentives_fixed = sum(checkpoint.config.env.incentive_range) / 2.0
        grid = _grid_from_args(args, checkpoint.config.env)
        surface = q_surface(agent, grid, action, checkpoint.config.env)
    except (FileNotFoundError, CheckpointError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    write_q_surface_json(surface, args.out)
    print(f"q-surface ({action.label}): {surface.values.size} points -> {args.out}")
    return EXIT_OK


def cmd_curve(args) -> int:
    try:
        records = read_training_log(args.log)
    except (FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    with open(args.out, "w") as f:
        f.write("episode,total_reward\n")
        for r in records:
            f.write(f"{r.episode},{r.total_reward!r}\n")
    print(f"training curve: {len(records)} episodes -> {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        agent, checkpoint = _load_agent(args.ckpt)
    except (FileNotFoundError, CheckpointError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        server = create_server(
            agent, checkpoint.config.env, checkpoint.format_version,
            host=args.host, port=args.port, static_dir=args.static_dir,
            log_path=args.log, quiet=False,
        )
    except OSError as e:
        if e.errno == errno.EADDRINUSE:
            print(f"error: port {args.port} is already in use", file=sys.stderr)
            return EXIT_PORT_IN_USE
        raise
    print(f"serving advisor on http://{args.host}:{server.server_address[1]}/ "
          f"(checkpoint {args.ckpt})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pv-advisor",
        description="Train and query the farm-PV installation advisor.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run the DQN training loop")
    p.add_argument("--config", default=None,
                   help=f"experiment JSON (default: ${CONFIG_ENV_VAR} or built-ins)")
    p.add_argument("--out", default="checkpoint.json", help="checkpoint path")
    p.add_argument("--log", default="training_log.csv", help="episode log CSV path")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("recommend", help="one-shot recommendation for a scenario")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--load", type=float, required=True, help="farm load (kW)")
    p.add_argument("--incentives", type=float, required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--json", action="store_true", help="emit a JSON object")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("map", help="export the decision map CSV over a state grid")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--out", default="decision_map.csv")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("surface", help="export a Q-value surface JSON (2 swept axes)")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--action", choices=["install", "dont-install"], default="install")
    p.add_argument("--out", default="q_surface.json")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("curve", help="extract the reward-per-episode curve")
    p.add_argument("--log", required=True, help="training log CSV")
    p.add_argument("--out", default="reward_curve.csv")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("serve", help="serve the HTTP advisor API and optional UI")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static-dir", default=None, help="directory of UI assets")
    p.add_argument("--log", default=None, help="training log CSV for /api/curve")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
