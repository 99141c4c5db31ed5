"""Latency and throughput estimation: routing tables, closed forms, and a
cycle-level simulator."""

from .analytic import channel_load_bound, zero_load_latency
from .sim import RouterConfig, TrafficSpec, simulate
from .sweep import PerfReport, curve_csv, saturation_sweep
from .tables import RouteTables, build_channels, klass_step, route_tables

__all__ = [
    "PerfReport",
    "RouteTables",
    "RouterConfig",
    "TrafficSpec",
    "build_channels",
    "channel_load_bound",
    "curve_csv",
    "klass_step",
    "route_tables",
    "saturation_sweep",
    "simulate",
    "zero_load_latency",
]
