"""Closed-form performance estimates from the routing tables.

Zero-load latency averages the uncontended traversal cost over every ordered
tile pair. The saturation bound follows from channel loads: with uniform
traffic split evenly over all minimum-hop paths, the busiest channel sees
gamma flit-hops per injected flit, so no injection rate above 1/gamma can be
sustained regardless of router quality.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..errors import ValidationError
from ..topology import Topology
from .sim import RouterConfig
from .tables import RouteTables, build_channels, route_tables


def zero_load_latency(t: Topology, latencies=None,
                      rc: RouterConfig | None = None, mode: str = "min_hop",
                      tables: RouteTables | None = None) -> float:
    """Mean uncontended packet head latency over all ordered pairs.

    Each traversal pays the injection delay once, the router delay at every
    router on the path (hops + 1 of them), and each link's pipeline latency.
    """
    rc = rc or RouterConfig()
    if tables is None:
        tables = route_tables(t, mode, latencies)
    n = tables.channels.n_tiles
    if n < 2:
        raise ValidationError("no traffic pairs: need at least two tiles")
    off_diag = ~np.eye(n, dtype=bool)
    hops = tables.hops[off_diag].astype(np.float64)
    lat = tables.latency_sum[off_diag].astype(np.float64)
    per_pair = rc.injection_delay + (hops + 1) * rc.router_delay + lat
    return float(per_pair.mean())


def _bfs_all(n, adj):
    dist = np.full((n, n), -1, dtype=np.int32)
    count = np.zeros((n, n), dtype=np.float64)  # exact for counts < 2^53
    for s in range(n):
        dist[s, s] = 0
        count[s, s] = 1.0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if dist[s, v] < 0:
                    dist[s, v] = dist[s, u] + 1
                    q.append(v)
                if dist[s, v] == dist[s, u] + 1:
                    count[s, v] += count[s, u]
    return dist, count


def channel_load_bound(t: Topology, mode: str = "min_hop") -> float:
    """Upper bound on sustainable injection rate, in flits/cycle/tile.

    The bound assumes ideal multipath: every minimum-hop path carries an
    equal share of its pair's traffic, whichever mode the deterministic
    tables use. Real tables concentrate flows, so simulation saturates at
    or below this figure.
    """
    del mode  # the bound is mode-independent by construction
    g = build_channels(t)
    n = g.n_tiles
    if n < 2:
        raise ValidationError("no traffic pairs: need at least two tiles")
    adj = [[] for _ in range(n)]
    for c in range(g.n_channels):
        adj[int(g.src[c])].append(int(g.dst[c]))
    dist, count = _bfs_all(n, adj)
    if (dist < 0).any():
        raise ValidationError("topology is disconnected; no load bound exists")

    U = g.src.astype(np.intp)
    V = g.dst.astype(np.intp)
    gamma = np.zeros(g.n_channels, dtype=np.float64)
    for s in range(n):
        # fraction of (s, d) shortest paths through channel (u -> v):
        # count(s, u) * count(v, d) / count(s, d) when distances line up.
        on_path = dist[s, U][:, None] + 1 + dist[V, :] == dist[s, :][None, :]
        share = np.where(
            on_path, count[s, U][:, None] * count[V, :] / count[s, :][None, :],
            0.0)
        share[:, s] = 0.0
        gamma += share.sum(axis=1)
    gamma /= n - 1
    return float(min(1.0, 1.0 / gamma.max()))
