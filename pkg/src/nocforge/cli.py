"""Command-line front end.

Five subcommands: generate a topology file, predict cost for one, simulate
its traffic, explore the skip-set lattice, and serve the same operations
over HTTP for the interactive UI.

Every file-producing run also writes a ``<out>.manifest.json`` sidecar
recording tool version, input hash, seed, and timestamps; the data files
point back at it by path. Timestamps live only in the manifest, so the
data files themselves are byte-reproducible.

Exit codes: 0 success, 2 rejected input, 3 pipeline failure, 4 simulated
deadlock.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from . import __version__
from .arch import ArchParams, load_arch
from .cost import CostReport, cost_report
from .errors import DeadlockError, PipelineError, ValidationError
from .explore import ExploreConfig, evaluate, hill_climb, pareto_front, trace_csv
from .floorplan import compute_spacings, discretize, size_tiles
from .perf import (
    RouterConfig, TrafficSpec, channel_load_bound, curve_csv, route_tables,
    saturation_sweep, simulate, zero_load_latency,
)
from .routing import detailed_route, global_route
from .topology import GridDims, Topology, TopologySpec, assign_ports, build_topology

TOPO_ALIASES = {
    "shg": "sparse_hamming",
    "fb": "flattened_butterfly",
    "folded": "folded_torus",
}

DEFAULT_SEED = 1


def _seed_default() -> int:
    return int(os.environ.get("HW_SEED", DEFAULT_SEED))


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _digest(doc) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass
class RunManifest:
    """Provenance sidecar for one command invocation."""

    tool_version: str
    command: str
    config_hash: str
    seed: int | None
    created_utc: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)

    @classmethod
    def start(cls, command: str, config_hash: str, seed: int | None,
              inputs: list[str]) -> "RunManifest":
        return cls(tool_version=__version__, command=command,
                   config_hash=config_hash, seed=seed,
                   created_utc=datetime.now(timezone.utc)
                   .isoformat(timespec="seconds"),
                   inputs=inputs)


def _write_outputs(manifest: RunManifest, files: dict[str, str]) -> None:
    """Write data files plus the manifest they all point back to."""
    manifest.outputs = sorted(files)
    manifest_path = manifest.outputs[0] + ".manifest.json"
    for path, text in files.items():
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(_dump_json(asdict(manifest)))


def _parse_offsets(text: str) -> frozenset[int]:
    text = text.strip()
    if not text:
        return frozenset()
    try:
        return frozenset(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad offset list {text!r}: {exc}") from exc


def _load_topology(path: str) -> Topology:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read topology file: {exc}") from exc
    return assign_ports(Topology.from_dict(doc))


def _design(t: Topology, arch: ArchParams):
    """Shared prefix of predict and simulate: floorplan, route, price."""
    gr = global_route(t)
    fp = compute_spacings(size_tiles(arch, t), gr.loads, arch)
    grid = discretize(fp, arch)
    routes = detailed_route(gr, grid)
    return cost_report(grid, routes, arch)


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def _flat_rows(doc: dict) -> list[tuple[str, str]]:
    rows = []
    for k in sorted(doc):
        v = doc[k]
        if isinstance(v, (dict, list, tuple)):
            continue
        rows.append((k, _fmt(v)))
    return rows


def _emit_report(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return _dump_json(doc)
    rows = _flat_rows(doc)
    if fmt == "csv":
        return "metric,value\n" + "".join(f"{k},{v}\n" for k, v in rows)
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def cmd_generate(args) -> int:
    name = TOPO_ALIASES.get(args.topo, args.topo)
    spec = TopologySpec(name=name, s_r=_parse_offsets(args.sr),
                        s_c=_parse_offsets(args.sc))
    t = build_topology(spec, GridDims(args.rows, args.cols))
    doc = t.to_dict()
    doc["link_count"] = len(t.links)
    if args.out:
        doc["manifest_path"] = args.out + ".manifest.json"
        manifest = RunManifest.start("generate", _digest(t.to_dict()),
                                     seed=None, inputs=[])
        _write_outputs(manifest, {args.out: _dump_json(doc)})
        print(f"wrote {args.out} ({len(t.links)} links)")
    else:
        sys.stdout.write(_dump_json(doc))
    return 0


def cmd_predict(args) -> int:
    t = _load_topology(args.topology)
    arch = load_arch(args.arch)
    cost = _design(t, arch)
    doc = cost.to_dict()
    if args.out:
        doc["manifest_path"] = args.out + ".manifest.json"
        manifest = RunManifest.start(
            "predict", _digest([t.to_dict(), arch.to_dict()]),
            seed=None, inputs=[args.topology, args.arch])
        _write_outputs(manifest, {args.out: _dump_json(doc)})
    sys.stdout.write(_emit_report(doc, args.format))
    return 0


def cmd_simulate(args) -> int:
    t = _load_topology(args.topology)
    arch = load_arch(args.arch)
    cost = _design(t, arch)
    latencies = list(cost.link_latencies)
    rc = RouterConfig(vcs=args.vcs, buffer_depth=args.buffer)
    tables = route_tables(t, args.mode, latencies)
    sim_kwargs = {}
    for name in ("warmup", "window", "drain"):
        if getattr(args, name) is not None:
            sim_kwargs[name] = getattr(args, name)

    if args.load is not None:
        traffic = TrafficSpec(injection_rate=args.load,
                              packet_length=args.packet, seed=args.seed)
        lat, acc = simulate(t, latencies, rc, traffic, tables=tables,
                            **sim_kwargs)
        doc = {
            "offered_load": args.load,
            "avg_latency_cycles": lat,
            "accepted_throughput": acc,
            "zero_load_latency_cycles": zero_load_latency(
                t, latencies, rc, tables=tables),
            "analytic_bound": channel_load_bound(t),
            "seed": args.seed,
        }
        curve = None
    else:
        traffic = TrafficSpec(injection_rate=1.0, packet_length=args.packet,
                              seed=args.seed)
        rep = saturation_sweep(t, latencies, rc, traffic, args.mode,
                               tables=tables, **sim_kwargs)
        doc = rep.to_dict()
        doc["seed"] = args.seed
        curve = curve_csv(rep)

    if args.out:
        doc["manifest_path"] = args.out + ".manifest.json"
        files = {args.out: _dump_json(doc)}
        if curve is not None:
            files[args.out + ".curve.csv"] = curve
        manifest = RunManifest.start(
            "simulate", _digest([t.to_dict(), arch.to_dict(), rc.to_dict(),
                                 traffic.to_dict(), args.mode]),
            seed=args.seed, inputs=[args.topology, args.arch])
        _write_outputs(manifest, files)
    if args.format == "csv" and curve is not None:
        sys.stdout.write(curve)
    else:
        sys.stdout.write(_emit_report(doc, args.format))
    return 0


def cmd_explore(args) -> int:
    arch = load_arch(args.arch)
    cfg = ExploreConfig(dims=GridDims(args.rows, args.cols), arch=arch,
                        budget=args.budget, evaluator=args.evaluator)
    best, trace = hill_climb(cfg)
    front = pareto_front(trace)

    winner_sim = None
    if args.simulate_winner and best.feasible:
        sim_cfg = ExploreConfig(dims=cfg.dims, arch=arch, budget=args.budget,
                                evaluator="simulated")
        winner_sim = evaluate(best.spec, sim_cfg)

    doc = {
        "config": cfg.to_dict(),
        "config_digest": cfg.digest,
        "best": best.to_dict(),
        "winner_simulated": winner_sim.to_dict() if winner_sim else None,
        "trace": [c.to_dict() for c in trace],
        "front": [c.to_dict() for c in front],
    }
    if args.out:
        doc["manifest_path"] = args.out + ".manifest.json"
        manifest = RunManifest.start("explore", cfg.digest, seed=args.seed,
                                     inputs=[args.arch])
        _write_outputs(manifest, {
            args.out: _dump_json(doc),
            args.out + ".trace.csv": trace_csv(trace),
            args.out + ".front.csv": trace_csv(front),
        })
    line = (f"best s_r={sorted(best.spec.s_r)} s_c={sorted(best.spec.s_c)} "
            f"feasible={best.feasible} evaluated={len(trace)} "
            f"front={len(front)}")
    print(line)
    return 0


def cmd_serve(args) -> int:
    from .serve import run_server
    run_server(host=args.host, port=args.port, static_dir=args.static)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nocforge",
        description="floorplan-aware NoC synthesis, costing, and search")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a topology file")
    g.add_argument("--topo", required=True,
                   help="mesh|ring|torus|folded_torus|hypercube|"
                        "flattened_butterfly|sparse_hamming (or shg, fb)")
    g.add_argument("--rows", type=int, required=True)
    g.add_argument("--cols", type=int, required=True)
    g.add_argument("--sr", default="", help="row skip offsets, e.g. 2,5")
    g.add_argument("--sc", default="", help="column skip offsets")
    g.add_argument("--out", help="output JSON path")
    g.set_defaults(func=cmd_generate)

    pr = sub.add_parser("predict", help="cost and latency report")
    pr.add_argument("--topology", required=True)
    pr.add_argument("--arch", required=True)
    pr.add_argument("--out")
    pr.add_argument("--format", choices=("json", "csv", "table"),
                    default="json")
    pr.set_defaults(func=cmd_predict)

    si = sub.add_parser("simulate", help="traffic simulation")
    si.add_argument("--topology", required=True)
    si.add_argument("--arch", required=True)
    si.add_argument("--vcs", type=int, default=8)
    si.add_argument("--buffer", type=int, default=32)
    si.add_argument("--seed", type=int, default=_seed_default())
    si.add_argument("--load", type=float,
                    help="single offered load; omit for a saturation sweep")
    si.add_argument("--packet", type=int, default=4)
    si.add_argument("--mode", choices=("min_hop", "min_hop_min_length"),
                    default="min_hop")
    si.add_argument("--warmup", type=int)
    si.add_argument("--window", type=int)
    si.add_argument("--drain", type=int)
    si.add_argument("--out")
    si.add_argument("--format", choices=("json", "csv", "table"),
                    default="json")
    si.set_defaults(func=cmd_simulate)

    ex = sub.add_parser("explore", help="hill-climb the skip-set lattice")
    ex.add_argument("--arch", required=True)
    ex.add_argument("--rows", type=int, required=True)
    ex.add_argument("--cols", type=int, required=True)
    ex.add_argument("--budget", type=float, default=0.40)
    ex.add_argument("--evaluator", choices=("analytic", "simulated"),
                    default="analytic")
    ex.add_argument("--seed", type=int, default=_seed_default())
    winner = ex.add_mutually_exclusive_group()
    winner.add_argument("--simulate-winner", dest="simulate_winner",
                        action="store_true", default=True)
    winner.add_argument("--no-simulate-winner", dest="simulate_winner",
                        action="store_false")
    ex.add_argument("--out")
    ex.set_defaults(func=cmd_explore)

    sv = sub.add_parser("serve", help="local HTTP service for the UI")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8787)
    sv.add_argument("--static", help="directory of UI files to serve")
    sv.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return 3
    except DeadlockError as exc:
        print(f"deadlock: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
