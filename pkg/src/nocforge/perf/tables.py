"""Deterministic next-hop tables and the virtual-channel class ladder.

Routing is memoryless: a table maps (current tile, destination tile) to the
outgoing directed channel, built per destination so every suffix of a route
is itself a routed path. On grid families (mesh, skip grids, butterfly,
hypercube) routes cross all row links before any column links; each phase is
solved inside its own one-dimensional subgraph, which preserves hop
optimality because every row shares one skip structure and every column
another. Rings and tori route on their cycles directly.

Freedom from routing deadlock comes from a monotone ladder of VC classes:

  ordinal ladder   grid families: a packet's class is the ordinal of its
                   current constant-direction segment. Within one class all
                   of a packet's hops move one way along one axis, so waits
                   order by coordinate; class only ever increases.
  cycle dateline   ring: class flips 0 to 1 when crossing one fixed cut
                   edge of the cycle.
  phase dateline   torus and folded torus: row phase uses classes {0,1},
                   column phase {2,3}, with the low bit set by the cut edge
                   of the row or column ring being traversed.

The simulator reserves one VC per class and spends the rest as shared
performance VCs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ..errors import PipelineError, ValidationError
from ..topology import Topology

EAST, WEST, SOUTH, NORTH = 0, 1, 2, 3

SCHEME_ORDINAL = 0
SCHEME_CYCLE = 1
SCHEME_XY_DATELINE = 2

_SCHEME_BY_FAMILY = {
    "mesh": SCHEME_ORDINAL,
    "sparse_hamming": SCHEME_ORDINAL,
    "flattened_butterfly": SCHEME_ORDINAL,
    "hypercube": SCHEME_ORDINAL,
    "ring": SCHEME_CYCLE,
    "torus": SCHEME_XY_DATELINE,
    "folded_torus": SCHEME_XY_DATELINE,
}

MODES = ("min_hop", "min_hop_min_length")


@dataclass
class ChannelGraph:
    """Directed channel view of a topology: link i becomes channels 2i, 2i+1."""

    n_tiles: int
    src: np.ndarray        # [C] tile id
    dst: np.ndarray        # [C] tile id
    link_index: np.ndarray  # [C]
    latency: np.ndarray    # [C] cycles
    direction: np.ndarray  # [C] EAST/WEST/SOUTH/NORTH
    dateline: np.ndarray   # [C] bool, set on cycle cut edges

    @property
    def n_channels(self) -> int:
        return len(self.src)


def klass_step(scheme: int, in_dir: int, in_class: int, out_dir: int,
               out_dateline: int) -> int:
    """VC class for the hop leaving on ``out_dir``; in_dir < 0 at injection."""
    if scheme == SCHEME_ORDINAL:
        if in_dir >= 0 and out_dir != in_dir:
            return in_class + 1
        return in_class
    if scheme == SCHEME_CYCLE:
        return 1 if out_dateline else in_class
    axis_out = 0 if out_dir <= WEST else 1
    axis_in = -1 if in_dir < 0 else (0 if in_dir <= WEST else 1)
    flag = (in_class & 1) if axis_in == axis_out else 0
    if out_dateline:
        flag = 1
    return 2 * axis_out + flag


def _tile_id(dims, pos) -> int:
    return pos[0] * dims.cols + pos[1]


def _direction(a, b) -> int:
    if a[0] == b[0]:
        return EAST if b[1] > a[1] else WEST
    return SOUTH if b[0] > a[0] else NORTH


def _cut_link(links_with_index) -> int:
    """Cut edge of a cycle subgraph: widest span, then smallest endpoints."""
    return max(links_with_index,
               key=lambda iln: (iln[1].span, tuple(-x for x in iln[1].a + iln[1].b)))[0]


def _dateline_links(t: Topology, scheme: int) -> set[int]:
    indexed = list(enumerate(t.links))
    if scheme == SCHEME_CYCLE:
        return {_cut_link(indexed)}
    if scheme != SCHEME_XY_DATELINE:
        return set()
    cuts = set()
    for r in range(t.dims.rows):
        row = [(i, ln) for i, ln in indexed if ln.is_row_link and ln.a[0] == r]
        if len(row) == t.dims.cols:  # edges == nodes: the row closes a cycle
            cuts.add(_cut_link(row))
    for c in range(t.dims.cols):
        col = [(i, ln) for i, ln in indexed if not ln.is_row_link and ln.a[1] == c]
        if len(col) == t.dims.rows:
            cuts.add(_cut_link(col))
    return cuts


def build_channels(t: Topology, latencies=None) -> ChannelGraph:
    """Expand links into directed channels with per-channel latency."""
    n_links = len(t.links)
    if latencies is None:
        latencies = [1] * n_links
    latencies = list(latencies)
    if len(latencies) != n_links:
        raise ValidationError(
            f"got {len(latencies)} link latencies for {n_links} links")
    if any(int(x) != x or x < 1 for x in latencies):
        raise ValidationError("link latencies must be integers >= 1 cycle")

    scheme = _SCHEME_BY_FAMILY[t.spec.name]
    cuts = _dateline_links(t, scheme)
    src, dst, link_index, latency, direction, dateline = [], [], [], [], [], []
    for i, ln in enumerate(t.links):
        a, b = _tile_id(t.dims, ln.a), _tile_id(t.dims, ln.b)
        for u, v, d in ((a, b, _direction(ln.a, ln.b)),
                        (b, a, _direction(ln.b, ln.a))):
            src.append(u)
            dst.append(v)
            link_index.append(i)
            latency.append(int(latencies[i]))
            direction.append(d)
            dateline.append(i in cuts)
    return ChannelGraph(
        n_tiles=t.dims.rows * t.dims.cols,
        src=np.array(src, dtype=np.int32),
        dst=np.array(dst, dtype=np.int32),
        link_index=np.array(link_index, dtype=np.int32),
        latency=np.array(latency, dtype=np.int32),
        direction=np.array(direction, dtype=np.int8),
        dateline=np.array(dateline, dtype=bool),
    )


@dataclass
class RouteTables:
    """All-pairs next-hop tables plus the VC scheme they are safe under."""

    topology: Topology
    mode: str
    channels: ChannelGraph
    next_channel: np.ndarray  # [N, N] channel id, -1 on the diagonal
    hops: np.ndarray          # [N, N]
    latency_sum: np.ndarray   # [N, N] cycles over the path's links
    scheme: int
    num_classes: int

    def path(self, s: int, d: int) -> tuple[int, ...]:
        """Directed channel ids from tile s to tile d."""
        out, cur = [], s
        while cur != d:
            ch = int(self.next_channel[cur, d])
            out.append(ch)
            cur = int(self.channels.dst[ch])
            if len(out) > int(self.hops[s, d]):
                raise PipelineError("routing table walked past its own hop count")
        return tuple(out)


def _key(mode, hops, lat):
    return (hops, lat) if mode == "min_hop" else (lat, hops)


def _axis_tables(n, adj, mode):
    """Per-destination shortest-path trees on one small subgraph.

    adj[u] lists (v, latency, channel_id). Returns next-channel, hop, and
    latency tables indexed [u][dest]; unreachable pairs keep -1 and None.
    """
    next_ch = [[-1] * n for _ in range(n)]
    hops = [[None] * n for _ in range(n)]
    lats = [[None] * n for _ in range(n)]
    for dest in range(n):
        best = {dest: (0, 0)}
        heap = [((0, 0), dest)]
        while heap:
            key, u = heapq.heappop(heap)
            if best.get(u) != key:
                continue
            h, lt = (key[0], key[1]) if mode == "min_hop" else (key[1], key[0])
            for v, w, _ch in adj[u]:
                cand = _key(mode, h + 1, lt + w)
                if v not in best or cand < best[v]:
                    best[v] = cand
                    heapq.heappush(heap, (cand, v))
        for u in range(n):
            if u == dest or u not in best:
                continue
            h, lt = (best[u][0], best[u][1]) if mode == "min_hop" \
                else (best[u][1], best[u][0])
            hops[u][dest], lats[u][dest] = h, lt
            # Among neighbors continuing a shortest path, lowest id wins.
            pick = None
            for v, w, ch in adj[u]:
                if v not in best:
                    continue
                vh, vl = (best[v][0], best[v][1]) if mode == "min_hop" \
                    else (best[v][1], best[v][0])
                if _key(mode, vh + 1, vl + w) == best[u] and \
                        (pick is None or v < pick[0]):
                    pick = (v, ch)
            next_ch[u][dest] = pick[1]
    return next_ch, hops, lats


def _channel_lookup(g: ChannelGraph):
    table = {}
    for c in range(g.n_channels):
        table[(int(g.src[c]), int(g.dst[c]))] = c
    return table


def _grid_tables(t: Topology, g: ChannelGraph, mode: str):
    R, C = t.dims.rows, t.dims.cols
    by_pair = _channel_lookup(g)

    def tid(r, c):
        return r * C + c

    row_adj = [[[] for _ in range(C)] for _ in range(R)]
    col_adj = [[[] for _ in range(R)] for _ in range(C)]
    for i, ln in enumerate(t.links):
        lat = int(g.latency[2 * i])
        if ln.is_row_link:
            r, (c1, c2) = ln.a[0], (ln.a[1], ln.b[1])
            row_adj[r][c1].append((c2, lat, by_pair[(tid(r, c1), tid(r, c2))]))
            row_adj[r][c2].append((c1, lat, by_pair[(tid(r, c2), tid(r, c1))]))
        else:
            c, (r1, r2) = ln.a[1], (ln.a[0], ln.b[0])
            col_adj[c][r1].append((r2, lat, by_pair[(tid(r1, c), tid(r2, c))]))
            col_adj[c][r2].append((r1, lat, by_pair[(tid(r2, c), tid(r1, c))]))

    row_tabs = [_axis_tables(C, row_adj[r], mode) for r in range(R)]
    col_tabs = [_axis_tables(R, col_adj[c], mode) for c in range(C)]

    n = R * C
    next_channel = np.full((n, n), -1, dtype=np.int32)
    hops = np.zeros((n, n), dtype=np.int32)
    latsum = np.zeros((n, n), dtype=np.int32)
    for sr in range(R):
        for sc in range(C):
            s = tid(sr, sc)
            for dr in range(R):
                for dc in range(C):
                    d = tid(dr, dc)
                    if s == d:
                        continue
                    rn, rh, rl = row_tabs[sr]
                    cn, ch_, cl = col_tabs[dc]
                    if (sc != dc and rh[sc][dc] is None) or \
                            (sr != dr and ch_[sr][dr] is None):
                        raise PipelineError(
                            f"tiles {s} and {d} are disconnected; cannot route")
                    hops[s, d] = (rh[sc][dc] or 0) + (ch_[sr][dr] or 0)
                    latsum[s, d] = (rl[sc][dc] or 0) + (cl[sr][dr] or 0)
                    if sc != dc:
                        next_channel[s, d] = rn[sc][dc]
                    else:
                        next_channel[s, d] = cn[sr][dr]
    return next_channel, hops, latsum


def _cycle_tables(t: Topology, g: ChannelGraph, mode: str):
    n = g.n_tiles
    adj = [[] for _ in range(n)]
    for c in range(g.n_channels):
        adj[int(g.src[c])].append((int(g.dst[c]), int(g.latency[c]), c))
    for lst in adj:
        lst.sort()
    next_ch, hops_l, lats_l = _axis_tables(n, adj, mode)
    next_channel = np.array(next_ch, dtype=np.int32)
    hops = np.zeros((n, n), dtype=np.int32)
    latsum = np.zeros((n, n), dtype=np.int32)
    for u in range(n):
        for d in range(n):
            if u == d:
                continue
            if hops_l[u][d] is None:
                raise PipelineError(
                    f"tiles {u} and {d} are disconnected; cannot route")
            hops[u, d] = hops_l[u][d]
            latsum[u, d] = lats_l[u][d]
    return next_channel, hops, latsum


def _count_classes(tables: "RouteTables") -> int:
    if tables.scheme == SCHEME_CYCLE:
        return 2
    if tables.scheme == SCHEME_XY_DATELINE:
        return 4
    g = tables.channels
    worst = 1
    for s in range(g.n_tiles):
        for d in range(g.n_tiles):
            if s == d:
                continue
            klass, in_dir = 0, -1
            for ch in tables.path(s, d):
                klass = klass_step(tables.scheme, in_dir, klass,
                                   int(g.direction[ch]), int(g.dateline[ch]))
                in_dir = int(g.direction[ch])
            worst = max(worst, klass + 1)
    return worst


def route_tables(t: Topology, mode: str = "min_hop",
                 latencies=None) -> RouteTables:
    """Build the all-pairs tables for one topology.

    min_hop orders paths by (hop count, summed link latency); the other mode
    swaps the two. Equal-cost choices settle on the lowest next tile id, so
    tables are reproducible across runs.
    """
    if mode not in MODES:
        raise ValidationError(f"routing mode must be one of {MODES}")
    g = build_channels(t, latencies)
    if t.spec.name == "ring":
        next_channel, hops, latsum = _cycle_tables(t, g, mode)
    else:
        next_channel, hops, latsum = _grid_tables(t, g, mode)
    tables = RouteTables(
        topology=t, mode=mode, channels=g, next_channel=next_channel,
        hops=hops, latency_sum=latsum,
        scheme=_SCHEME_BY_FAMILY[t.spec.name], num_classes=0,
    )
    tables.num_classes = _count_classes(tables)
    return tables
