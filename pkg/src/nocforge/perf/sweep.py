"""Saturation search and the combined performance report."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ValidationError
from ..topology import Topology
from .analytic import channel_load_bound, zero_load_latency
from .sim import RouterConfig, TrafficSpec, simulate
from .tables import RouteTables, route_tables

SATURATION_FACTOR = 3.0
SEARCH_STEPS = 8
CURVE_POINTS = 10


@dataclass(frozen=True)
class PerfReport:
    """Performance summary for one topology at one router configuration."""

    zero_load_latency_cycles: float
    saturation_throughput: float
    analytic_bound: float
    curve: tuple[tuple[float, float, float], ...] = field(default=())

    def __post_init__(self):
        if not 0.0 < self.saturation_throughput <= 1.0:
            raise ValidationError("saturation throughput must be in (0, 1]")
        # Simulation cannot beat the ideal-multipath load bound beyond noise.
        if self.saturation_throughput > self.analytic_bound + 0.05:
            raise ValidationError(
                f"saturation {self.saturation_throughput:.4f} exceeds the "
                f"channel load bound {self.analytic_bound:.4f} + 0.05")

    def to_dict(self) -> dict:
        return {
            "zero_load_latency_cycles": self.zero_load_latency_cycles,
            "saturation_throughput": self.saturation_throughput,
            "analytic_bound": self.analytic_bound,
            "curve": [list(p) for p in self.curve],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PerfReport":
        return cls(
            zero_load_latency_cycles=data["zero_load_latency_cycles"],
            saturation_throughput=data["saturation_throughput"],
            analytic_bound=data["analytic_bound"],
            curve=tuple(tuple(p) for p in data["curve"]),
        )


def curve_csv(report: PerfReport) -> str:
    """The latency curve as CSV text for plotting."""
    lines = ["offered_load,avg_latency,accepted_throughput"]
    for offered, latency, accepted in report.curve:
        lines.append(f"{offered:.6g},{latency:.6g},{accepted:.6g}")
    return "\n".join(lines) + "\n"


def saturation_sweep(t: Topology, latencies=None,
                     rc: RouterConfig | None = None,
                     base_traffic: TrafficSpec | None = None,
                     mode: str = "min_hop",
                     tables: RouteTables | None = None,
                     **sim_kwargs) -> PerfReport:
    """Find the saturation point and sample the latency curve.

    Saturation is the smallest offered load whose average latency exceeds
    3x the zero-load figure, located by an 8-step binary search on (0, 1];
    the reported throughput is the accepted rate at that load. The curve
    holds 10 evenly spaced loads up to the saturation estimate.
    """
    rc = rc or RouterConfig()
    base_traffic = base_traffic or TrafficSpec(injection_rate=1.0)
    if tables is None:
        tables = route_tables(t, mode, latencies)
    zero_load = zero_load_latency(t, latencies, rc, mode, tables=tables)
    bound = channel_load_bound(t, mode)

    cache: dict[float, tuple[float, float]] = {}

    def run(rate: float) -> tuple[float, float]:
        if rate not in cache:
            traffic = TrafficSpec(
                injection_rate=rate, pattern=base_traffic.pattern,
                packet_length=base_traffic.packet_length,
                seed=base_traffic.seed)
            cache[rate] = simulate(t, latencies, rc, traffic, mode,
                                   tables=tables, **sim_kwargs)
        return cache[rate]

    def saturated(rate: float) -> bool:
        latency, _ = run(rate)
        return latency > SATURATION_FACTOR * zero_load

    lo, hi = 0.0, 1.0
    if saturated(hi):
        for _ in range(SEARCH_STEPS):
            mid = (lo + hi) / 2
            if saturated(mid):
                hi = mid
            else:
                lo = mid
    sat_rate = hi
    _, sat_accepted = run(sat_rate)

    curve = []
    for k in range(1, CURVE_POINTS + 1):
        rate = sat_rate * k / CURVE_POINTS
        latency, accepted = run(rate)
        curve.append((rate, latency, accepted))

    return PerfReport(
        zero_load_latency_cycles=zero_load,
        saturation_throughput=sat_accepted,
        analytic_bound=bound,
        curve=tuple(curve),
    )
