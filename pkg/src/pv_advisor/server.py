"""HTTP advisor API over a frozen checkpoint, plus static UI hosting.

All endpoints are GET with JSON responses; nothing mutates the model, so
the threading server can answer concurrent requests against one shared
agent. Endpoints:

    /api/health            status, checkpoint version, slider ranges
    /api/recommend         ?load=&incentives=&budget=
    /api/map               ?<axis>_min/_max/_points or <axis>_fixed
    /api/qsurface          ?action=install|dont_install + grid params
    /api/curve             training-log columns, empty when no log given
    /<file>                static assets when --static-dir is set
"""
from __future__ import annotations

import json
import mimetypes
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .env import Action
from .report import (AxisSpec, GridSpec, decision_map, q_surface, recommend,
                     surface_to_doc)
from .trainer import read_training_log

AXIS_PARAMS = {"load": 0, "incentives": 1, "budget": 2}


class BadRequest(ValueError):
    pass


def _float_param(query: dict, name: str, default=None) -> float | None:
    if name not in query:
        return default
    raw = query[name][-1]
    try:
        return float(raw)
    except ValueError:
        raise BadRequest(f"parameter {name!r} must be a number, got {raw!r}") from None


def _int_param(query: dict, name: str, default=None) -> int | None:
    if name not in query:
        return default
    raw = query[name][-1]
    try:
        return int(raw)
    except ValueError:
        raise BadRequest(f"parameter {name!r} must be an integer, got {raw!r}") from None


def grid_from_query(query: dict, env_cfg, default_points=(10, 10, 10)) -> GridSpec:
    """Build a GridSpec from <axis>_min/_max/_points/_fixed query params."""
    ranges = (env_cfg.load_range, env_cfg.incentive_range, env_cfg.budget_range)
    axes = []
    for name, i in AXIS_PARAMS.items():
        fixed = _float_param(query, f"{name}_fixed")
        if fixed is not None:
            axes.append(AxisSpec.fixed(fixed))
            continue
        lo = _float_param(query, f"{name}_min", ranges[i][0])
        hi = _float_param(query, f"{name}_max", ranges[i][1])
        points = _int_param(query, f"{name}_points", default_points[i])
        try:
            axes.append(AxisSpec(lo, hi, points))
        except ValueError as e:
            raise BadRequest(str(e)) from None
    return GridSpec(load=axes[0], incentives=axes[1], budget=axes[2])


def _decision_map_doc(dmap) -> dict:
    return {
        "axes": {
            "farm_load": dmap.grid.load.values().tolist(),
            "incentives": dmap.grid.incentives.values().tolist(),
            "budget": dmap.grid.budget.values().tolist(),
        },
        "entries": [
            {
                "farm_load": e.state.farm_load,
                "incentives": e.state.incentives,
                "budget": e.state.budget,
                "action": e.action.label,
                "action_code": int(e.action),
                "q_dont_install": e.q_dont_install,
                "q_install": e.q_install,
            }
            for e in dmap.entries
        ],
    }


class AdvisorHandler(BaseHTTPRequestHandler):
    """Routes one frozen agent; configured via make_handler()."""

    agent = None
    env_cfg = None
    checkpoint_version = None
    grid_points = (10, 10, 10)
    static_dir = None
    log_path = None
    quiet = True

    def log_message(self, fmt, *args):
        if not self.quiet:
            super().log_message(fmt, *args)

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        parsed = urlparse(self.path)
        query = parse_qs(parsed.query)
        try:
            if parsed.path == "/api/health":
                self._send_json(self._health())
            elif parsed.path == "/api/recommend":
                self._send_json(self._recommend(query))
            elif parsed.path == "/api/map":
                grid = grid_from_query(query, self.env_cfg, self.grid_points)
                dmap = decision_map(self.agent, grid, self.env_cfg)
                self._send_json(_decision_map_doc(dmap))
            elif parsed.path == "/api/qsurface":
                self._send_json(self._qsurface(query))
            elif parsed.path == "/api/curve":
                self._send_json(self._curve())
            else:
                self._static(parsed.path)
        except BadRequest as e:
            self._send_json({"error": str(e)}, status=400)
        except ValueError as e:
            self._send_json({"error": str(e)}, status=400)

    def _health(self) -> dict:
        c = self.env_cfg
        return {
            "status": "ok",
            "checkpoint_version": self.checkpoint_version,
            "ranges": {
                "farm_load": list(c.load_range),
                "incentives": list(c.incentive_range),
                "budget": list(c.budget_range),
            },
            "system_cost": c.system_cost,
        }

    def _recommend(self, query: dict) -> dict:
        values = {}
        for name in ("load", "incentives", "budget"):
            v = _float_param(query, name)
            if v is None:
                raise BadRequest(f"missing parameter {name!r}")
            values[name] = v
        try:
            return recommend(self.agent, self.env_cfg, values["load"],
                             values["incentives"], values["budget"])
        except ValueError as e:
            raise BadRequest(str(e)) from None

    def _qsurface(self, query: dict) -> dict:
        raw = (query.get("action") or ["install"])[-1].lower()
        if raw in ("install", "1"):
            action = Action.INSTALL
        elif raw in ("dont_install", "dont-install", "0"):
            action = Action.DONT_INSTALL
        else:
            raise BadRequest(f"unknown action {raw!r}")
        defaults = dict(query)
        # the held-out axis defaults to its range midpoint unless given
        if not any(k.startswith("incentives_") for k in defaults):
            mid = sum(self.env_cfg.incentive_range) / 2.0
            defaults["incentives_fixed"] = [str(mid)]
        grid = grid_from_query(defaults, self.env_cfg, self.grid_points)
        surface = q_surface(self.agent, grid, action, self.env_cfg)
        return surface_to_doc(surface)

    def _curve(self) -> dict:
        if self.log_path is None or not Path(self.log_path).exists():
            return {"episodes": [], "total_rewards": []}
        records = read_training_log(self.log_path)
        return {
            "episodes": [r.episode for r in records],
            "total_rewards": [r.total_reward for r in records],
        }

    def _static(self, path: str) -> None:
        if self.static_dir is None:
            self._send_json({"error": f"no such endpoint: {path}"}, status=404)
            return
        rel = path.lstrip("/") or "index.html"
        root = Path(self.static_dir).resolve()
        target = (root / rel).resolve()
        if not target.is_relative_to(root) or not target.is_file():
            self._send_json({"error": f"not found: {path}"}, status=404)
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_handler(agent, env_cfg, checkpoint_version, grid_points=(10, 10, 10),
                 static_dir=None, log_path=None, quiet=True):
    return type("ConfiguredAdvisorHandler", (AdvisorHandler,), {
        "agent": agent,
        "env_cfg": env_cfg,
        "checkpoint_version": checkpoint_version,
        "grid_points": tuple(grid_points),
        "static_dir": static_dir,
        "log_path": log_path,
        "quiet": quiet,
    })


def create_server(agent, env_cfg, checkpoint_version, host="127.0.0.1", port=8000,
                  grid_points=(10, 10, 10), static_dir=None, log_path=None,
                  quiet=True) -> ThreadingHTTPServer:
    handler = make_handler(agent, env_cfg, checkpoint_version, grid_points,
                           static_dir, log_path, quiet)
    return ThreadingHTTPServer((host, port), handler)
