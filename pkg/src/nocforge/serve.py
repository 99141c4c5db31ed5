"""Loopback HTTP service behind the interactive explorer.

Four endpoints, all JSON:

    GET  /api/schema        what the service speaks, defaults included
    POST /api/evaluate      {dims, arch, spec, budget?, rc?, evaluator?}
                            -> {candidate, display}
    POST /api/explore/step  same body -> {current, neighbors, suggested}
    POST /api/layout        same body -> {layout, error}; drawable cell
                            bands and routed link polylines

``display`` carries every headline metric re-serialized one number per
string, so a client can show figures byte-equal to what the predict and
simulate commands write without doing its own float formatting.

Pipeline failures travel inside candidates (HTTP 200); only malformed
requests get a 400, always shaped {code, field, message}. The process
keeps no state beyond the evaluation cache, so requests are independent
and safe to issue concurrently.
"""

from __future__ import annotations

import json
import mimetypes
import os
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import __version__
from .arch import ArchParams
from .cost import link_latency
from .errors import PipelineError, ValidationError
from .explore import (
    OBJECTIVE, Candidate, ExploreConfig, evaluate, neighbor_specs,
)
from .floorplan import compute_spacings, discretize, size_tiles
from .perf import RouterConfig
from .routing import detailed_route, global_route
from .topology import (
    GridDims, TOPOLOGY_NAMES, TopologySpec, assign_ports, build_topology,
)


class RequestError(Exception):
    def __init__(self, code: str, field: str | None, message: str):
        super().__init__(message)
        self.code = code
        self.field = field

    def to_dict(self) -> dict:
        return {"code": self.code, "field": self.field,
                "message": str(self)}


def _require(body: dict, field: str) -> object:
    if field not in body:
        raise RequestError("missing_field", field,
                           f"request body needs a {field!r} object")
    return body[field]


def _parse_config(body: dict) -> ExploreConfig:
    try:
        return ExploreConfig(
            dims=GridDims.from_dict(_require(body, "dims")),
            arch=ArchParams.from_dict(_require(body, "arch")),
            rc=RouterConfig.from_dict(body["rc"]) if "rc" in body
            else RouterConfig(),
            budget=body.get("budget", 0.40),
            evaluator=body.get("evaluator", "analytic"),
        )
    except RequestError:
        raise
    except ValidationError as exc:
        raise RequestError("validation_error", None, str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise RequestError("bad_value", None, str(exc)) from exc


def _parse_spec(body: dict) -> TopologySpec:
    try:
        return TopologySpec.from_dict(_require(body, "spec"))
    except RequestError:
        raise
    except ValidationError as exc:
        raise RequestError("validation_error", "spec", str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise RequestError("bad_value", "spec", str(exc)) from exc


def _display(cand: Candidate) -> dict:
    """One string per headline metric, rendered exactly as the report
    files render the same float."""
    out = {}
    if cand.cost is not None:
        for k in ("a_tot_mm2", "a_nonoc_mm2", "area_overhead", "p_tot_w",
                  "p_nonoc_w", "p_noc_w"):
            out[k] = json.dumps(getattr(cand.cost, k))
    if cand.perf is not None:
        for k in ("zero_load_latency_cycles", "saturation_throughput",
                  "analytic_bound"):
            out[k] = json.dumps(getattr(cand.perf, k))
    return out


def _toggle_specs(spec: TopologySpec, dims: GridDims) -> list[TopologySpec]:
    """Every single-offset flip: additions first, then removals."""
    out = neighbor_specs(spec, dims)
    for x in sorted(spec.s_r):
        out.append(TopologySpec(name=spec.name,
                                s_r=frozenset(spec.s_r - {x}),
                                s_c=spec.s_c))
    for x in sorted(spec.s_c):
        out.append(TopologySpec(name=spec.name, s_r=spec.s_r,
                                s_c=frozenset(spec.s_c - {x})))
    return out


def _corners(path) -> list[list[int]]:
    # Direction-change cells only; segments between them are straight runs.
    pts = [[path[0][0], path[0][1]]]
    for prev, cur in zip(path, path[1:]):
        if cur[2] != prev[2]:
            pts.append([cur[0], cur[1]])
    last = [path[-1][0], path[-1][1]]
    if pts[-1] != last:
        pts.append(last)
    return pts


def api_layout(body: dict) -> dict:
    """Drawable geometry for one spec: cell bands plus link polylines.

    Runs the geometric half of the pipeline only; no perf. A pipeline
    failure comes back as {layout: null, error: message} at 200, the
    same failure-as-data shape evaluate uses.
    """
    cfg = _parse_config(body)
    spec = _parse_spec(body)
    try:
        t = assign_ports(build_topology(spec, cfg.dims))
        gr = global_route(t)
        fp = compute_spacings(size_tiles(cfg.arch, t), gr.loads, cfg.arch)
        grid = discretize(fp, cfg.arch)
        routes = detailed_route(gr, grid)
    except (ValidationError, PipelineError) as exc:
        return {"layout": None, "error": str(exc)}
    links = []
    for r in routes:
        ln = t.links[r.link_index]
        links.append({
            "a": list(ln.a),
            "b": list(ln.b),
            "kind": ln.kind,
            "span": ln.span,
            "latency_cycles": link_latency(r, grid, cfg.arch),
            "length_mm": r.length_mm,
            "points": _corners(r.path),
        })
    return {
        "layout": {
            "dims": cfg.dims.to_dict(),
            "cell_mm": {"height": grid.cell_height_mm,
                        "width": grid.cell_width_mm},
            "n_rows": grid.n_rows,
            "n_cols": grid.n_cols,
            "row_bands": [[b.kind, b.index, b.start, b.size]
                          for b in grid.row_bands],
            "col_bands": [[b.kind, b.index, b.start, b.size]
                          for b in grid.col_bands],
            "links": links,
        },
        "error": None,
    }


def api_schema() -> dict:
    return {
        "tool": "nocforge",
        "version": __version__,
        "objective": list(OBJECTIVE),
        "topology_names": sorted(TOPOLOGY_NAMES),
        "defaults": {"budget": 0.40, "rc": RouterConfig().to_dict(),
                     "evaluator": "analytic"},
        "endpoints": {
            "GET /api/schema": "this document",
            "POST /api/evaluate":
                "{dims, arch, spec, budget?, rc?, evaluator?} -> "
                "{candidate, display}",
            "POST /api/explore/step":
                "same body -> {current, neighbors, suggested}",
            "POST /api/layout":
                "same body -> {layout, error}",
        },
    }


def api_evaluate(body: dict) -> dict:
    cfg = _parse_config(body)
    cand = evaluate(_parse_spec(body), cfg)
    return {"candidate": cand.to_dict(), "display": _display(cand)}


def api_explore_step(body: dict) -> dict:
    cfg = _parse_config(body)
    spec = _parse_spec(body)
    current = evaluate(spec, cfg)
    ranked = [evaluate(s, cfg) for s in _toggle_specs(spec, cfg.dims)]
    feasible = [c for c in ranked if c.feasible]
    suggested = min(feasible, key=Candidate.objective_key, default=None)
    return {
        "current": current.to_dict(),
        "neighbors": [c.to_dict() for c in ranked],
        "suggested": suggested.spec.to_dict() if suggested else None,
    }


_POST_ROUTES = {
    "/api/evaluate": api_evaluate,
    "/api/explore/step": api_explore_step,
    "/api/layout": api_layout,
}


class Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    static_dir: str | None = None
    quiet = True

    def log_message(self, fmt, *args):
        if not self.quiet:
            super().log_message(fmt, *args)

    def _send(self, status: int, payload: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _send_json(self, status: int, doc: dict) -> None:
        self._send(status, json.dumps(doc).encode(), "application/json")

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        if self.path == "/api/schema":
            self._send_json(200, api_schema())
            return
        if self.static_dir is not None:
            self._serve_static()
            return
        self._send_json(404, {"code": "not_found", "field": None,
                              "message": f"no route for {self.path}"})

    def _serve_static(self):
        rel = self.path.lstrip("/") or "index.html"
        rel = os.path.normpath(rel)
        path = os.path.join(self.static_dir, rel)
        # normpath plus the prefix check keeps requests inside the tree
        if rel.startswith("..") or not os.path.isfile(path):
            self._send_json(404, {"code": "not_found", "field": None,
                                  "message": f"no file for {self.path}"})
            return
        ctype = mimetypes.guess_type(path)[0] or "application/octet-stream"
        with open(path, "rb") as fh:
            self._send(200, fh.read(), ctype)

    def do_POST(self):
        handler = _POST_ROUTES.get(self.path)
        if handler is None:
            self._send_json(404, {"code": "not_found", "field": None,
                                  "message": f"no route for {self.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length)
            try:
                body = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise RequestError("invalid_json", None,
                                   f"body is not JSON: {exc}") from exc
            if not isinstance(body, dict):
                raise RequestError("invalid_json", None,
                                   "body must be a JSON object")
            self._send_json(200, handler(body))
        except RequestError as exc:
            self._send_json(400, exc.to_dict())


def make_server(host: str = "127.0.0.1", port: int = 0,
                static_dir: str | None = None) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (Handler,),
                   {"static_dir": static_dir})
    return ThreadingHTTPServer((host, port), handler)


def run_server(host: str = "127.0.0.1", port: int = 8787,
               static_dir: str | None = None) -> None:
    server = make_server(host, port, static_dir)
    addr = f"http://{server.server_address[0]}:{server.server_address[1]}"
    print(f"serving on {addr} (ctrl-c to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
