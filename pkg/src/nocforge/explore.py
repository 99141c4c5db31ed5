"""Greedy skip-set search under an area-overhead budget.

The candidate space is the lattice of sparse Hamming configurations: one
step adds a single offset to the row or column skip set. The climb only
ever moves to a feasible neighbor that beats the current design on the
fixed objective (throughput first, latency as the tie-breaker), so the
winner always respects the budget and sits at a local optimum of the
lattice.

Inside the loop every candidate is scored analytically: the channel-load
bound stands in for saturation throughput. That keeps a full neighborhood
evaluation sub-second, cheap enough for an interactive caller to poll.
The cycle-level simulator is reserved for re-scoring a finished winner
(or for .evaluator = "simulated" when someone wants the slow truth).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .arch import ArchParams
from .cost import CostReport, cost_report
from .errors import DeadlockError, PipelineError, ValidationError
from .floorplan import compute_spacings, discretize, size_tiles
from .perf import (
    PerfReport, RouterConfig, channel_load_bound, route_tables,
    saturation_sweep, zero_load_latency,
)
from .routing import detailed_route, global_route
from .topology import GridDims, TopologySpec, assign_ports, build_topology

EVALUATORS = ("analytic", "simulated")

# Fixed priority order: raise the saturation estimate, then cut zero-load
# latency. Kept as data so configs and reports can state it explicitly.
OBJECTIVE = ("max saturation_throughput", "min zero_load_latency")


@dataclass(frozen=True)
class ExploreConfig:
    """Everything a search run depends on besides the candidate itself."""

    dims: GridDims
    arch: ArchParams
    rc: RouterConfig = field(default_factory=RouterConfig)
    budget: float = 0.40
    objective: tuple[str, str] = OBJECTIVE
    evaluator: str = "analytic"

    def __post_init__(self):
        if not 0.0 < self.budget < 1.0:
            raise ValidationError(
                f"budget must lie in (0, 1), got {self.budget}")
        if tuple(self.objective) != OBJECTIVE:
            raise ValidationError(
                f"objective order is fixed as {OBJECTIVE}")
        if self.evaluator not in EVALUATORS:
            raise ValidationError(
                f"evaluator must be one of {EVALUATORS}, got "
                f"{self.evaluator!r}")

    def to_dict(self) -> dict:
        return {
            "dims": self.dims.to_dict(),
            "arch": self.arch.to_dict(),
            "rc": self.rc.to_dict(),
            "budget": self.budget,
            "objective": list(self.objective),
            "evaluator": self.evaluator,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExploreConfig":
        return cls(
            dims=GridDims.from_dict(d["dims"]),
            arch=ArchParams.from_dict(d["arch"]),
            rc=RouterConfig.from_dict(d["rc"]),
            budget=d["budget"],
            objective=tuple(d.get("objective", OBJECTIVE)),
            evaluator=d.get("evaluator", "analytic"),
        )

    @property
    def digest(self) -> str:
        """Pipeline identity hash; stamped on every candidate it produces."""
        blob = json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class Candidate:
    """One fully evaluated design point.

    A pipeline failure leaves cost and perf empty and carries the reason;
    such a candidate is infeasible by definition.
    """

    spec: TopologySpec
    cost: CostReport | None
    perf: PerfReport | None
    feasible: bool
    pipeline_digest: str
    error: str | None = None

    def objective_key(self) -> tuple[float, float]:
        """Sort key: lexicographic, lower is better."""
        if self.perf is None:
            return (float("inf"), float("inf"))
        return (-self.perf.saturation_throughput,
                self.perf.zero_load_latency_cycles)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "cost": self.cost.to_dict() if self.cost else None,
            "perf": self.perf.to_dict() if self.perf else None,
            "feasible": self.feasible,
            "pipeline_digest": self.pipeline_digest,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Candidate":
        return cls(
            spec=TopologySpec.from_dict(d["spec"]),
            cost=CostReport.from_dict(d["cost"]) if d["cost"] else None,
            perf=PerfReport.from_dict(d["perf"]) if d["perf"] else None,
            feasible=d["feasible"],
            pipeline_digest=d["pipeline_digest"],
            error=d.get("error"),
        )


_CACHE: dict[tuple[str, TopologySpec], Candidate] = {}
_CACHE_LOCK = threading.Lock()


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def _run_pipeline(spec: TopologySpec, cfg: ExploreConfig) -> Candidate:
    t = assign_ports(build_topology(spec, cfg.dims))
    gr = global_route(t)
    fp = compute_spacings(size_tiles(cfg.arch, t), gr.loads, cfg.arch)
    grid = discretize(fp, cfg.arch)
    routes = detailed_route(gr, grid)
    cost = cost_report(grid, routes, cfg.arch)

    latencies = list(cost.link_latencies)
    tables = route_tables(t, latencies=latencies)
    if cfg.evaluator == "analytic":
        bound = channel_load_bound(t)
        perf = PerfReport(
            zero_load_latency_cycles=zero_load_latency(
                t, latencies, cfg.rc, tables=tables),
            saturation_throughput=bound,
            analytic_bound=bound,
        )
    else:
        perf = saturation_sweep(t, latencies, cfg.rc, tables=tables)

    return Candidate(
        spec=spec, cost=cost, perf=perf,
        feasible=cost.area_overhead <= cfg.budget,
        pipeline_digest=cfg.digest,
    )


def evaluate(spec: TopologySpec, cfg: ExploreConfig) -> Candidate:
    """Run the whole pipeline on one spec, memoized per (config, spec)."""
    key = (cfg.digest, spec)
    with _CACHE_LOCK:
        hit = _CACHE.get(key)
    if hit is not None:
        return hit
    try:
        cand = _run_pipeline(spec, cfg)
    except (ValidationError, PipelineError, DeadlockError) as exc:
        cand = Candidate(spec=spec, cost=None, perf=None, feasible=False,
                         pipeline_digest=cfg.digest, error=str(exc))
    with _CACHE_LOCK:
        # First writer wins so concurrent callers share one object.
        return _CACHE.setdefault(key, cand)


def neighbor_specs(spec: TopologySpec, dims: GridDims) -> list[TopologySpec]:
    """Single-offset additions, row offsets first, smallest offset first.

    This order doubles as the tie-break: the climb takes the earliest
    neighbor among equals.
    """
    out = []
    for x in range(2, dims.cols):
        if x not in spec.s_r:
            out.append(TopologySpec(name=spec.name,
                                    s_r=frozenset(spec.s_r | {x}),
                                    s_c=spec.s_c))
    for x in range(2, dims.rows):
        if x not in spec.s_c:
            out.append(TopologySpec(name=spec.name, s_r=spec.s_r,
                                    s_c=frozenset(spec.s_c | {x})))
    return out


def hill_climb(cfg: ExploreConfig) -> tuple[Candidate, list[Candidate]]:
    """Climb from the plain mesh, one added skip offset at a time.

    Returns the local optimum and the full evaluation trace in visit
    order. An infeasible mesh ends the search immediately: with nothing
    affordable there is nowhere to climb.
    """
    base = TopologySpec(name="sparse_hamming", s_r=frozenset(),
                        s_c=frozenset())
    current = evaluate(base, cfg)
    trace = [current]
    if not current.feasible:
        return current, trace

    while True:
        specs = neighbor_specs(current.spec, cfg.dims)
        if not specs:
            break
        with ThreadPoolExecutor(max_workers=min(8, len(specs))) as pool:
            ranked = list(pool.map(lambda s: evaluate(s, cfg), specs))
        trace.extend(ranked)
        feasible = [c for c in ranked if c.feasible]
        if not feasible:
            break
        best = min(feasible, key=Candidate.objective_key)
        if best.objective_key() >= current.objective_key():
            break
        current = best
    return current, trace


def pareto_front(candidates: list[Candidate]) -> list[Candidate]:
    """Non-dominated subset under (overhead, network power, -throughput,
    latency), all minimized. Input order is preserved; repeated specs and
    failed evaluations never make the front."""
    if not candidates:
        raise ValidationError("pareto_front needs at least one candidate")
    uniq, seen = [], set()
    for c in candidates:
        if c.cost is None or c.perf is None or c.spec in seen:
            continue
        seen.add(c.spec)
        uniq.append(c)

    def metrics(c: Candidate) -> tuple[float, float, float, float]:
        return (c.cost.area_overhead, c.cost.p_noc_w,
                -c.perf.saturation_throughput,
                c.perf.zero_load_latency_cycles)

    def dominates(a, b) -> bool:
        return all(x <= y for x, y in zip(a, b)) and a != b

    pts = [metrics(c) for c in uniq]
    return [c for c, p in zip(uniq, pts)
            if not any(dominates(q, p) for q in pts)]


def trace_csv(candidates: list[Candidate]) -> str:
    """Flat table of a trace or front, one candidate per row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s_r", "s_c", "feasible", "area_overhead", "p_noc_w",
                "saturation_throughput", "zero_load_latency_cycles",
                "error"])
    for c in candidates:
        w.writerow([
            " ".join(str(x) for x in sorted(c.spec.s_r)),
            " ".join(str(x) for x in sorted(c.spec.s_c)),
            int(c.feasible),
            f"{c.cost.area_overhead:.6g}" if c.cost else "",
            f"{c.cost.p_noc_w:.6g}" if c.cost else "",
            f"{c.perf.saturation_throughput:.6g}" if c.perf else "",
            f"{c.perf.zero_load_latency_cycles:.6g}" if c.perf else "",
            c.error or "",
        ])
    return buf.getvalue()
