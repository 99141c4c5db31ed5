"""Cycle-level network simulator.

One synchronous kernel advances the whole network a cycle at a time:
arrivals leave the link pipelines, sources inject, heads get routed, each
input port nominates one virtual channel, and each output grants one
nomination round-robin. Credits meter every downstream buffer, a packet owns
its output VC from head to tail, and heads pick their ladder-class VC first,
falling back to the shared performance VCs above the ladder. All arbitration
pointers and the Philox-derived traffic streams are fixed by the seed, so a
run is a pure function of its inputs.

The kernel is plain array code: under numba it compiles to native (cached
on disk), and without numba the same function runs unmodified in the
interpreter, which is far slower but bit-identical.

Flits travel packed in int64s:

    bits  0..30  generation cycle
    bits 31..39  destination tile
    bit  40      head flag
    bit  41      tail flag
    bits 42..45  VC ladder class, rewritten at every hop

Measured latency is head ejection minus generation; at zero load it equals
injection_delay + (hops + 1) * router_delay + the summed link latencies.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DeadlockError, PipelineError, ValidationError
from ..topology import Topology
from .tables import RouteTables, klass_step, route_tables

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


WARMUP_CYCLES = 10_000
MEASURE_CYCLES = 50_000
DRAIN_CYCLES = 20_000
DEADLOCK_CYCLES = 5_000

_OK, _DEADLOCK, _BROKEN = 0, 1, 2


@dataclass(frozen=True)
class RouterConfig:
    """Router microarchitecture knobs, all in cycles or flit slots."""

    vcs: int = 8
    buffer_depth: int = 32
    router_delay: int = 1
    injection_delay: int = 1

    def __post_init__(self):
        for name in ("vcs", "buffer_depth", "router_delay", "injection_delay"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValidationError(f"{name} must be an integer >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RouterConfig":
        return cls(**data)


@dataclass(frozen=True)
class TrafficSpec:
    """Offered traffic: uniform random, Bernoulli packet generation."""

    injection_rate: float
    pattern: str = "uniform_random"
    packet_length: int = 4
    seed: int = 1

    def __post_init__(self):
        if self.pattern != "uniform_random":
            raise ValidationError(
                f"unsupported traffic pattern {self.pattern!r}")
        if not 0.0 < self.injection_rate <= 1.0:
            raise ValidationError(
                "injection_rate must be in (0, 1] flits/cycle/tile")
        if int(self.packet_length) != self.packet_length or self.packet_length < 1:
            raise ValidationError("packet_length must be an integer >= 1")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError("seed must be an integer >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrafficSpec":
        return cls(**data)


_klass = njit(cache=True)(klass_step)


@njit(cache=True)
def _kernel(n_tiles, vcs, bdepth, plen, router_delay, inj_delay,
            warm_start, warm_end, t_max, deadlock_win, scheme, nclasses,
            next_out, cdst, clat, cdir, cdl,
            in_router, r_in_ptr, r_in_list, r_out_ptr, r_out_list,
            inj_draw, dst_draw, qcap, stats):
    C = cdst.shape[0]
    n_in = C + n_tiles
    n_out = C + n_tiles
    maxlat = 1
    for c in range(C):
        if clat[c] + 1 > maxlat:
            maxlat = clat[c] + 1

    fl = np.zeros((n_in, vcs, bdepth), dtype=np.int64)
    ft = np.zeros((n_in, vcs, bdepth), dtype=np.int64)
    bhead = np.zeros((n_in, vcs), dtype=np.int32)
    bcnt = np.zeros((n_in, vcs), dtype=np.int32)
    busy = np.zeros(n_in, dtype=np.int32)
    route_out = np.full((n_in, vcs), -1, dtype=np.int32)
    route_vc = np.full((n_in, vcs), -1, dtype=np.int32)
    route_cls = np.zeros((n_in, vcs), dtype=np.int32)
    credits = np.full((C, vcs), bdepth, dtype=np.int32)
    lock = np.full((C, vcs), -1, dtype=np.int64)
    pf = np.full((C, maxlat), -1, dtype=np.int64)
    pv = np.zeros((C, maxlat), dtype=np.int32)
    sq_dst = np.zeros((n_tiles, qcap), dtype=np.int32)
    sq_gen = np.zeros((n_tiles, qcap), dtype=np.int64)
    sq_head = np.zeros(n_tiles, dtype=np.int32)
    sq_cnt = np.zeros(n_tiles, dtype=np.int32)
    inj_vc = np.full(n_tiles, -1, dtype=np.int32)
    inj_sent = np.zeros(n_tiles, dtype=np.int32)
    rr_inj = np.zeros(n_tiles, dtype=np.int32)
    rr_nom = np.zeros(n_in, dtype=np.int32)
    rr_gr = np.zeros(n_out, dtype=np.int32)
    rr_pvc = np.zeros(C, dtype=np.int32)
    nom_out = np.full(n_in, -1, dtype=np.int32)
    nom_vc = np.zeros(n_in, dtype=np.int32)
    win_stamp = np.full(n_out, -1, dtype=np.int64)
    win_in = np.zeros(n_out, dtype=np.int32)
    win_dist = np.zeros(n_out, dtype=np.int32)
    win_pos = np.zeros(n_out, dtype=np.int32)

    lat_sum = 0
    lat_cnt = 0
    win_flits = 0
    pending = 0
    meas_gen = 0
    buffered = 0
    last_move = -1
    status = _OK
    end_t = 0

    for t in range(t_max):
        moved = False

        # Link pipelines deliver into downstream input VCs; space was
        # reserved by the credit taken at send time.
        for c in range(C):
            slot = t % (clat[c] + 1)
            f = pf[c, slot]
            if f >= 0:
                v = pv[c, slot]
                pos = (bhead[c, v] + bcnt[c, v]) % bdepth
                fl[c, v, pos] = f
                ft[c, v, pos] = t
                if bcnt[c, v] == 0:
                    busy[c] += 1
                bcnt[c, v] += 1
                buffered += 1
                pf[c, slot] = -1
                moved = True

        # Bernoulli packet generation, then one flit per cycle from the
        # source queue into a free injection VC. A packet streams into a
        # single VC; its flits become visible injection_delay cycles later.
        for i in range(n_tiles):
            if inj_draw[t, i] != 0:
                pos = (sq_head[i] + sq_cnt[i]) % qcap
                sq_dst[i, pos] = dst_draw[t, i]
                sq_gen[i, pos] = t
                sq_cnt[i] += 1
                if warm_start <= t < warm_end:
                    pending += 1
                    meas_gen += 1
            if sq_cnt[i] > 0:
                idx = C + i
                if inj_vc[i] < 0:
                    for k in range(vcs):
                        v = (rr_inj[i] + k) % vcs
                        if bcnt[idx, v] < bdepth:
                            inj_vc[i] = v
                            inj_sent[i] = 0
                            rr_inj[i] = (v + 1) % vcs
                            break
                if inj_vc[i] >= 0:
                    v = inj_vc[i]
                    if bcnt[idx, v] < bdepth:
                        h = sq_head[i]
                        f = sq_gen[i, h] | (np.int64(sq_dst[i, h]) << 31)
                        if inj_sent[i] == 0:
                            f |= np.int64(1) << 40
                        if inj_sent[i] == plen - 1:
                            f |= np.int64(1) << 41
                        pos = (bhead[idx, v] + bcnt[idx, v]) % bdepth
                        fl[idx, v, pos] = f
                        ft[idx, v, pos] = t + inj_delay
                        if bcnt[idx, v] == 0:
                            busy[idx] += 1
                        bcnt[idx, v] += 1
                        buffered += 1
                        inj_sent[i] += 1
                        moved = True
                        if inj_sent[i] == plen:
                            sq_head[i] = (h + 1) % qcap
                            sq_cnt[i] -= 1
                            inj_vc[i] = -1

        # Route computation for VC heads without a cached route.
        for idx in range(n_in):
            if busy[idx] == 0:
                continue
            for v in range(vcs):
                if bcnt[idx, v] == 0 or route_out[idx, v] >= 0:
                    continue
                f = fl[idx, v, bhead[idx, v]]
                if (f >> 40) & 1 == 0:
                    status = _BROKEN  # packets must enter VCs contiguously
                    break
                dstt = (f >> 31) & 0x1FF
                r = in_router[idx]
                if r == dstt:
                    route_out[idx, v] = C + r
                    route_cls[idx, v] = 0
                else:
                    o = next_out[r, dstt]
                    in_dir = -1
                    if idx < C:
                        in_dir = cdir[idx]
                    route_out[idx, v] = o
                    route_cls[idx, v] = _klass(scheme, in_dir,
                                               (f >> 42) & 0xF,
                                               cdir[o], cdl[o])
            if status != _OK:
                break
        if status != _OK:
            end_t = t
            break

        # Each input port nominates its first sendable VC, round-robin.
        for idx in range(n_in):
            nom_out[idx] = -1
            if busy[idx] == 0:
                continue
            for k in range(vcs):
                v = (rr_nom[idx] + k) % vcs
                if bcnt[idx, v] == 0:
                    continue
                if ft[idx, v, bhead[idx, v]] + router_delay > t:
                    continue
                o = route_out[idx, v]
                if o < 0:
                    continue
                if o < C:
                    vo = route_vc[idx, v]
                    if vo >= 0:
                        if credits[o, vo] <= 0:
                            continue
                    else:
                        cls = route_cls[idx, v]
                        ok = lock[o, cls] < 0 and credits[o, cls] > 0
                        if not ok:
                            for p in range(nclasses, vcs):
                                if lock[o, p] < 0 and credits[o, p] > 0:
                                    ok = True
                                    break
                        if not ok:
                            continue
                nom_out[idx] = o
                nom_vc[idx] = v
                break

        # One grant per output, round-robin over the router's input ports.
        for r in range(n_tiles):
            base = r_in_ptr[r]
            nin = r_in_ptr[r + 1] - base
            for p in range(nin):
                idx = r_in_list[base + p]
                o = nom_out[idx]
                if o < 0:
                    continue
                d = p - rr_gr[o]
                if d < 0:
                    d += nin
                if win_stamp[o] != t or d < win_dist[o]:
                    win_stamp[o] = t
                    win_dist[o] = d
                    win_in[o] = idx
                    win_pos[o] = p
            for q in range(r_out_ptr[r], r_out_ptr[r + 1]):
                o = r_out_list[q]
                if win_stamp[o] != t:
                    continue
                idx = win_in[o]
                v = nom_vc[idx]
                hpos = bhead[idx, v]
                f = fl[idx, v, hpos]
                bhead[idx, v] = (hpos + 1) % bdepth
                bcnt[idx, v] -= 1
                if bcnt[idx, v] == 0:
                    busy[idx] -= 1
                buffered -= 1
                is_head = (f >> 40) & 1 != 0
                is_tail = (f >> 41) & 1 != 0
                if o < C:
                    vo = route_vc[idx, v]
                    if is_head and vo < 0:
                        cls = route_cls[idx, v]
                        if lock[o, cls] < 0 and credits[o, cls] > 0:
                            vo = cls
                        else:
                            span = vcs - nclasses
                            for k in range(span):
                                p2 = nclasses + (rr_pvc[o] + k) % span
                                if lock[o, p2] < 0 and credits[o, p2] > 0:
                                    vo = p2
                                    rr_pvc[o] = (p2 - nclasses + 1) % span
                                    break
                        lock[o, vo] = idx * vcs + v
                        route_vc[idx, v] = vo
                    if is_head:
                        f = (f & ~(np.int64(0xF) << 42)) | \
                            (np.int64(route_cls[idx, v]) << 42)
                    vo = route_vc[idx, v]
                    slot = (t + clat[o]) % (clat[o] + 1)
                    pf[o, slot] = f
                    pv[o, slot] = vo
                    credits[o, vo] -= 1
                    if is_tail:
                        lock[o, vo] = -1
                else:
                    if is_head:
                        gen = f & 0x7FFFFFFF
                        if warm_start <= gen < warm_end:
                            lat_sum += t - gen
                            lat_cnt += 1
                            pending -= 1
                    if warm_start <= t < warm_end:
                        win_flits += 1
                if idx < C:
                    credits[idx, v] += 1
                if is_tail:
                    route_out[idx, v] = -1
                    route_vc[idx, v] = -1
                rr_nom[idx] = (v + 1) % vcs
                rr_gr[o] = win_pos[o] + 1
                if rr_gr[o] >= nin:
                    rr_gr[o] = 0
                moved = True

        if moved:
            last_move = t
        elif buffered > 0 and t - last_move >= deadlock_win:
            status = _DEADLOCK
            end_t = t
            break
        end_t = t
        if t >= warm_end and pending == 0:
            break

    stats[0] = lat_sum
    stats[1] = lat_cnt
    stats[2] = win_flits
    stats[3] = status
    stats[4] = end_t
    stats[5] = pending
    stats[6] = meas_gen


def _router_csr(n_tiles, channels):
    C = channels.n_channels
    ins = [[] for _ in range(n_tiles)]
    outs = [[] for _ in range(n_tiles)]
    for c in range(C):
        outs[int(channels.src[c])].append(c)
        ins[int(channels.dst[c])].append(c)
    for r in range(n_tiles):
        ins[r].append(C + r)   # injection port last
        outs[r].append(C + r)  # ejection port last
    in_ptr = np.zeros(n_tiles + 1, dtype=np.int32)
    out_ptr = np.zeros(n_tiles + 1, dtype=np.int32)
    in_list, out_list = [], []
    for r in range(n_tiles):
        in_list.extend(ins[r])
        out_list.extend(outs[r])
        in_ptr[r + 1] = len(in_list)
        out_ptr[r + 1] = len(out_list)
    return (in_ptr, np.array(in_list, dtype=np.int32),
            out_ptr, np.array(out_list, dtype=np.int32))


def _traffic_draws(n_tiles, cycles, traffic: TrafficSpec):
    rng = np.random.Generator(np.random.Philox(traffic.seed))
    p = traffic.injection_rate / traffic.packet_length
    draws = (rng.random((cycles, n_tiles)) < p).astype(np.uint8)
    dst = rng.integers(0, n_tiles - 1, size=(cycles, n_tiles), dtype=np.int32)
    dst += dst >= np.arange(n_tiles, dtype=np.int32)[None, :]
    return draws, dst


def simulate(t: Topology, latencies=None, rc: RouterConfig | None = None,
             traffic: TrafficSpec | None = None, mode: str = "min_hop",
             tables: RouteTables | None = None,
             warmup: int = WARMUP_CYCLES, window: int = MEASURE_CYCLES,
             drain: int = DRAIN_CYCLES,
             deadlock_cycles: int = DEADLOCK_CYCLES) -> tuple[float, float]:
    """Run one load point; returns (avg packet latency, accepted throughput).

    Latency averages over packets generated inside the measurement window
    (the run drains, up to a cap, until they all eject); throughput counts
    every flit ejected inside the window, per cycle per tile.
    """
    if traffic is None:
        raise ValidationError("simulate needs a TrafficSpec")
    rc = rc or RouterConfig()
    if tables is None:
        tables = route_tables(t, mode, latencies)
    n = tables.channels.n_tiles
    if n < 2:
        raise ValidationError("no traffic pairs: need at least two tiles")
    if tables.num_classes > rc.vcs:
        raise ValidationError(
            f"deadlock freedom on {t.spec.name} needs {tables.num_classes} "
            f"virtual channels, got {rc.vcs}")
    if tables.num_classes > 16:
        raise ValidationError("VC class ladder too tall to encode (max 16)")

    g = tables.channels
    in_ptr, in_list, out_ptr, out_list = _router_csr(n, g)
    in_router = np.empty(g.n_channels + n, dtype=np.int32)
    in_router[:g.n_channels] = g.dst
    in_router[g.n_channels:] = np.arange(n, dtype=np.int32)

    total = warmup + window + drain
    draws, dst = _traffic_draws(n, total, traffic)
    qcap = int(draws.sum(axis=0).max()) + 2

    stats = np.zeros(8, dtype=np.int64)
    _kernel(n, rc.vcs, rc.buffer_depth, traffic.packet_length,
            rc.router_delay, rc.injection_delay,
            warmup, warmup + window, total, deadlock_cycles,
            tables.scheme, tables.num_classes,
            tables.next_channel, g.dst.astype(np.int32),
            g.latency.astype(np.int32), g.direction.astype(np.int32),
            g.dateline.astype(np.int32),
            in_router, in_ptr, in_list, out_ptr, out_list,
            draws, dst, qcap, stats)

    lat_sum, lat_cnt, win_flits, status, end_t = (int(x) for x in stats[:5])
    if status == _DEADLOCK:
        raise DeadlockError(
            f"simulation deadlock on {t.spec.name} "
            f"{t.dims.rows}x{t.dims.cols} at offered load "
            f"{traffic.injection_rate:.4f}: no flit movement for "
            f"{deadlock_cycles} cycles (cycle {end_t})", cycle=end_t)
    if status == _BROKEN:
        raise PipelineError("simulator desynchronized: non-head flit at the "
                            "front of an unrouted VC")
    if lat_cnt == 0:
        raise PipelineError(
            "no packets completed in the measurement window; raise the "
            "injection rate or lengthen the run")
    return lat_sum / lat_cnt, win_flits / (window * n)
