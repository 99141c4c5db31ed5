"""Link routing, in two stages.

Global routing assigns every link to one channel: row links go to the
horizontal gap above or below their row, column links to the gap left or
right of their column. Links are processed longest first and each takes the
side whose channel currently has the smaller maximum cross-section load
(ties go above/left). The per-gap loads returned here drive gap sizing.

Only the long runs of a link load its channel. Neighbor links cross the one
gap between their tiles head-on, and the short hook a longer link needs to
reach its channel rides through whatever space the crossing floor provides;
both merely force a gap to exist (one cell) rather than widening it. The
same pass fixes each port's physical wall slot: ports on one face split
into a near group (above/left) packed from the face's start and a far group
packed from its end, ordered by destination distance within the group, so a
neighbor link gets the same slot on both walls and crosses straight.

Detailed routing then carves per-cell paths in the discretized grid with a
cheapest-path search that pays a penalty for entering an already-claimed
cell in the same direction, followed by a few rip-up-and-reroute rounds
over whatever still collides. Collisions are reported, never fixed up by
widening: if a configuration does not fit the provisioned space, the
numbers say so.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import PipelineError, ValidationError
from .floorplan import ChannelLoads, UnitCellGrid
from .topology import EAST, NORTH, SOUTH, WEST, GridDims, Link, Topology

ABOVE, BELOW, LEFT, RIGHT = "above", "below", "left", "right"
H, V = "horizontal", "vertical"

# Cost of entering a cell whose slot for that direction is already taken.
COLLISION_PENALTY = 10
REROUTE_ROUNDS = 3


@dataclass(frozen=True)
class GlobalRoute:
    """Channel sides, wall slot ranks, and per-gap loads for one topology."""

    topology: Topology
    sides: tuple[str, ...]     # per link, ABOVE/BELOW for row links, LEFT/RIGHT for column links
    rank_a: tuple[int, ...]    # slot rank of each link's a-end within its face group
    rank_b: tuple[int, ...]
    loads: ChannelLoads

    def to_dict(self) -> dict:
        return {
            "sides": list(self.sides),
            "rank_a": list(self.rank_a),
            "rank_b": list(self.rank_b),
            "loads": self.loads.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict, topology: Topology) -> "GlobalRoute":
        return cls(
            topology=topology,
            sides=tuple(d["sides"]),
            rank_a=tuple(d["rank_a"]),
            rank_b=tuple(d["rank_b"]),
            loads=ChannelLoads.from_dict(d["loads"]),
        )


@dataclass(frozen=True)
class RoutedLink:
    """Final cell-level path of one link.

    Each path entry is (cell_row, cell_col, direction); the direction is the
    one the wire travels through that cell (the first cell uses its exit
    direction). ``collisions`` counts this link's cells where some other
    link claims the same direction slot.
    """

    link_index: int
    path: tuple[tuple[int, int, str], ...]
    length_mm: float
    collisions: int

    def to_dict(self) -> dict:
        return {
            "link_index": self.link_index,
            "path": [[r, c, d] for r, c, d in self.path],
            "length_mm": self.length_mm,
            "collisions": self.collisions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RoutedLink":
        return cls(
            link_index=d["link_index"],
            path=tuple((r, c, dd) for r, c, dd in d["path"]),
            length_mm=d["length_mm"],
            collisions=d["collisions"],
        )


def _route_order(links: tuple[Link, ...]) -> list[int]:
    return sorted(range(len(links)), key=lambda i: (-links[i].span, i))


def _run_interval(ln: Link) -> tuple[int, int]:
    # Cross-sections a run covers: x is the cut between tile x and x+1.
    if ln.is_row_link:
        return ln.a[1], ln.b[1]
    return ln.a[0], ln.b[0]


def _greedy_sides(t: Topology) -> tuple[dict[int, str], dict, dict]:
    # One channel per (row, side) and (column, side); a gap between two tile
    # rows hosts the lower row's "above" channel and the upper row's "below"
    # channel side by side, so their loads add when the gap is sized.
    R, C = t.dims.rows, t.dims.cols
    row_chan = {(r, s): [0] * max(C - 1, 1) for r in range(R) for s in (ABOVE, BELOW)}
    col_chan = {(c, s): [0] * max(R - 1, 1) for c in range(C) for s in (LEFT, RIGHT)}
    sides: dict[int, str] = {}
    for i in _route_order(t.links):
        ln = t.links[i]
        if ln.is_row_link:
            chan, key, near_side, far_side = row_chan, ln.a[0], ABOVE, BELOW
        else:
            chan, key, near_side, far_side = col_chan, ln.a[1], LEFT, RIGHT
        near, far = chan[(key, near_side)], chan[(key, far_side)]
        side = near_side if max(near) <= max(far) else far_side
        sides[i] = side
        if ln.span > 1:
            runs = near if side == near_side else far
            lo, hi = _run_interval(ln)
            for x in range(lo, hi):
                runs[x] += 1
    return sides, row_chan, col_chan


def _gap_loads(t: Topology, row_chan: dict, col_chan: dict) -> ChannelLoads:
    R, C = t.dims.rows, t.dims.cols

    # Crossing floors: a link passing through a gap needs it to exist even
    # if nothing runs along it.
    row_cross = [0] * (R + 1)
    col_cross = [0] * (C + 1)
    for ln in t.links:
        lo, hi = _run_interval(ln)
        cross = col_cross if ln.is_row_link else row_cross
        for g in range(lo + 1, hi + 1):
            cross[g] = 1

    def gap_load(chan, count, g, below_side, above_side, width, cross):
        upper = chan[(g - 1, below_side)] if g > 0 else [0] * width
        lower = chan[(g, above_side)] if g < count else [0] * width
        parallel = max(u + l for u, l in zip(upper, lower))
        return max(parallel, cross[g])

    return ChannelLoads(
        row_gaps=tuple(gap_load(row_chan, R, g, BELOW, ABOVE, max(C - 1, 1), row_cross)
                       for g in range(R + 1)),
        col_gaps=tuple(gap_load(col_chan, C, g, RIGHT, LEFT, max(R - 1, 1), col_cross)
                       for g in range(C + 1)),
    )


def global_route(t: Topology, dims: GridDims | None = None) -> GlobalRoute:
    """Assign channels and wall slots; returns per-gap loads for sizing."""
    if dims is None:
        dims = t.dims
    if dims != t.dims:
        raise ValidationError("dims disagree with the topology's grid")
    if any(ln.port_a is None or ln.port_b is None for ln in t.links):
        raise ValidationError("topology has no ports; run assign_ports first")

    sides, row_chan, col_chan = _greedy_sides(t)
    loads = _gap_loads(t, row_chan, col_chan)
    rank_a, rank_b = _slot_ranks(t, sides)
    return GlobalRoute(
        topology=t,
        sides=tuple(sides[i] for i in range(len(t.links))),
        rank_a=rank_a,
        rank_b=rank_b,
        loads=loads,
    )


def _slot_ranks(t: Topology, sides: dict[int, str]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    # Near-side (above/left) ports pack from the face's start, far-side from
    # its end; within a group, closer destinations sit closer to the edge.
    groups: dict[tuple, list[tuple[int, int, bool]]] = {}
    for i, ln in enumerate(t.links):
        near = sides[i] in (ABOVE, LEFT)
        groups.setdefault((ln.a, ln.port_a.face, near), []).append((ln.span, i, True))
        groups.setdefault((ln.b, ln.port_b.face, near), []).append((ln.span, i, False))
    rank_a = [0] * len(t.links)
    rank_b = [0] * len(t.links)
    for members in groups.values():
        members.sort()
        for rank, (_span, i, is_a) in enumerate(members):
            (rank_a if is_a else rank_b)[i] = rank
    return tuple(rank_a), tuple(rank_b)


def recompute_loads(g: GlobalRoute) -> ChannelLoads:
    """Recount per-gap loads from the stored assignment (consistency check)."""
    t = g.topology
    R, C = t.dims.rows, t.dims.cols
    row_chan = {(r, s): [0] * max(C - 1, 1) for r in range(R) for s in (ABOVE, BELOW)}
    col_chan = {(c, s): [0] * max(R - 1, 1) for c in range(C) for s in (LEFT, RIGHT)}
    for i, ln in enumerate(t.links):
        if ln.span <= 1:
            continue
        lo, hi = _run_interval(ln)
        chan = row_chan if ln.is_row_link else col_chan
        key = ln.a[0] if ln.is_row_link else ln.a[1]
        runs = chan[(key, g.sides[i])]
        for x in range(lo, hi):
            runs[x] += 1
    return _gap_loads(t, row_chan, col_chan)


# ------------------------------------------------------------ detailed stage

def port_cells(g: GlobalRoute, grid: UnitCellGrid) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Resolve each link's two wall slots to concrete gap cells."""
    out = []
    for i, ln in enumerate(g.topology.links):
        near = g.sides[i] in (ABOVE, LEFT)
        out.append((
            _port_cell(grid, ln.a, ln.port_a.face, g.rank_a[i], near),
            _port_cell(grid, ln.b, ln.port_b.face, g.rank_b[i], near),
        ))
    return out


def _port_cell(grid: UnitCellGrid, tile, face: str, rank: int, near: bool) -> tuple[int, int]:
    rb, cb = grid.tile_band(tile)
    along = rb.size if face in (EAST, WEST) else cb.size
    if rank >= along:
        raise PipelineError(
            f"tile face {face} of {tile} needs slot {rank} but is only {along} cells long")
    offset = rank if near else along - 1 - rank
    if face == EAST:
        return rb.start + offset, grid.gap_col_band(tile[1] + 1).start
    if face == WEST:
        return rb.start + offset, grid.gap_col_band(tile[1]).stop - 1
    if face == SOUTH:
        return grid.gap_row_band(tile[0] + 1).start, cb.start + offset
    return grid.gap_row_band(tile[0]).stop - 1, cb.start + offset


def _window(g: GlobalRoute, grid: UnitCellGrid, i: int, a: tuple[int, int], b: tuple[int, int]):
    ln = g.topology.links[i]
    r_lo, r_hi = min(a[0], b[0]), max(a[0], b[0])
    c_lo, c_hi = min(a[1], b[1]), max(a[1], b[1])
    if ln.span > 1:
        if ln.is_row_link:
            band = grid.gap_row_band(ln.a[0] if g.sides[i] == ABOVE else ln.a[0] + 1)
            r_lo, r_hi = min(r_lo, band.start), max(r_hi, band.stop - 1)
        else:
            band = grid.gap_col_band(ln.a[1] if g.sides[i] == LEFT else ln.a[1] + 1)
            c_lo, c_hi = min(c_lo, band.start), max(c_hi, band.stop - 1)
    return (max(r_lo - 1, 0), min(r_hi + 1, grid.n_rows - 1),
            max(c_lo - 1, 0), min(c_hi + 1, grid.n_cols - 1))


_STEPS = ((0, 1, H), (0, -1, H), (1, 0, V), (-1, 0, V))


def _cheapest_path(grid: UnitCellGrid, start, goal, window, axis: str):
    """A* from start to goal over free cells; returns [(r, c, dir), ...].

    Cost mirrors the claims a committed path makes: 1 per cell, plus the
    collision penalty for every already-claimed slot the path would take,
    including the second slot a turn claims at its corner cell. Charging
    claims exactly keeps loops strictly more expensive than their shortcut,
    so the cheapest path never revisits a cell.
    """
    if start == goal:
        return [(start[0], start[1], axis)]
    occ = {H: grid.h_wire_count, V: grid.v_wire_count}
    r_lo, r_hi, c_lo, c_hi = window
    tiles = grid.occupancy

    def entry_cost(cell, d) -> int:
        return 1 + (COLLISION_PENALTY if occ[d][cell] > 0 else 0)

    best: dict[tuple[tuple[int, int], str], int] = {}
    parent: dict[tuple[tuple[int, int], str], tuple] = {}
    heap = []
    counter = 0
    for dr, dc, d in _STEPS:
        cell = (start[0] + dr, start[1] + dc)
        if not (r_lo <= cell[0] <= r_hi and c_lo <= cell[1] <= c_hi) or tiles[cell]:
            continue
        g_cost = entry_cost(start, d) + entry_cost(cell, d)
        node = (cell, d)
        if g_cost < best.get(node, 1 << 60):
            best[node] = g_cost
            parent[node] = None
            h = abs(cell[0] - goal[0]) + abs(cell[1] - goal[1])
            counter += 1
            heapq.heappush(heap, (g_cost + h, counter, g_cost, node))

    while heap:
        _f, _tie, g_cost, node = heapq.heappop(heap)
        if g_cost > best.get(node, 1 << 60):
            continue
        cell, d = node
        if cell == goal:
            steps = []
            cur = node
            while cur is not None:
                steps.append(cur)
                cur = parent[cur]
            steps.reverse()
            return [(start[0], start[1], steps[0][1])] + [(c[0], c[1], dd) for c, dd in steps]
        for dr, dc, nd in _STEPS:
            ncell = (cell[0] + dr, cell[1] + dc)
            if not (r_lo <= ncell[0] <= r_hi and c_lo <= ncell[1] <= c_hi) or tiles[ncell]:
                continue
            turn = (COLLISION_PENALTY if nd != d and occ[nd][cell] > 0 else 0)
            ng = g_cost + turn + entry_cost(ncell, nd)
            nnode = (ncell, nd)
            if ng < best.get(nnode, 1 << 60):
                best[nnode] = ng
                parent[nnode] = node
                h = abs(ncell[0] - goal[0]) + abs(ncell[1] - goal[1])
                counter += 1
                heapq.heappush(heap, (ng + h, counter, ng, nnode))
    return None


def _claims(path) -> list[tuple[int, int, str]]:
    # A turn claims both direction slots of its corner cell.
    out = [(r, c, d) for r, c, d in path]
    for i in range(1, len(path)):
        pr, pc, pd = path[i - 1]
        if path[i][2] != pd:
            out.append((pr, pc, path[i][2]))
    seen = set()
    uniq = []
    for claim in out:
        if claim not in seen:
            seen.add(claim)
            uniq.append(claim)
    return uniq


def detailed_route(g: GlobalRoute, grid: UnitCellGrid) -> list[RoutedLink]:
    """Carve every link's cell path; collisions are reported, not hidden."""
    t = g.topology
    ends = port_cells(g, grid)
    occ = {H: grid.h_wire_count, V: grid.v_wire_count}
    occ[H][:] = 0
    occ[V][:] = 0

    paths: dict[int, list] = {}
    claims: dict[int, list] = {}

    def axis_of(i: int) -> str:
        return H if t.links[i].is_row_link else V

    def route_one(i: int):
        a, b = ends[i]
        path = _cheapest_path(grid, a, b, _window(g, grid, i, a, b), axis_of(i))
        if path is None:
            path = _cheapest_path(grid, a, b, (0, grid.n_rows - 1, 0, grid.n_cols - 1),
                                  axis_of(i))
        if path is None:
            raise PipelineError(f"no route between port cells {a} and {b}")
        paths[i] = path
        claims[i] = _claims(path)
        for r, c, d in claims[i]:
            occ[d][r, c] += 1

    order = _route_order(t.links)
    for i in order:
        route_one(i)

    def collision_cells(i: int) -> int:
        shared = {(r, c) for r, c, d in claims[i] if occ[d][r, c] > 1}
        return len(shared)

    for _ in range(REROUTE_ROUNDS):
        trouble = [(collision_cells(i), i) for i in order]
        trouble = [(n, i) for n, i in trouble if n > 0]
        if not trouble:
            break
        trouble.sort(key=lambda t_: (-t_[0], t_[1]))
        for _n, i in trouble:
            for r, c, d in claims[i]:
                occ[d][r, c] -= 1
            route_one(i)

    routed = []
    for i in range(len(t.links)):
        length = sum(grid.cell_width_mm if d == H else grid.cell_height_mm
                     for _r, _c, d in paths[i])
        routed.append(RoutedLink(
            link_index=i,
            path=tuple(paths[i]),
            length_mm=length,
            collisions=collision_cells(i),
        ))
    return routed


def routability_metrics(routes: list[RoutedLink], grid: UnitCellGrid) -> dict:
    """Summary numbers for how evenly and tightly the routing came out.

    Cross-sections are cut through every gap at each cell position that
    faces a tile band, so intersection blocks where links hook into their
    channels do not blur the density picture.
    """
    total_collisions = sum(r.collisions for r in routes)
    max_h = int(grid.h_wire_count.max()) if grid.h_wire_count.size else 0
    max_v = int(grid.v_wire_count.max()) if grid.v_wire_count.size else 0

    cuts: list[int] = []
    tile_cols = [b for b in grid.col_bands if b.kind == "tile"]
    tile_rows = [b for b in grid.row_bands if b.kind == "tile"]
    for band in grid.row_bands:
        if band.kind != "gap" or band.size == 0:
            continue
        for cb in tile_cols:
            for x in range(cb.start, cb.stop):
                cuts.append(int(grid.h_wire_count[band.start:band.stop, x].sum()))
    for band in grid.col_bands:
        if band.kind != "gap" or band.size == 0:
            continue
        for rb in tile_rows:
            for x in range(rb.start, rb.stop):
                cuts.append(int(grid.v_wire_count[x, band.start:band.stop].sum()))
    peak = max(cuts) if cuts else 0
    uniformity = (sum(cuts) / len(cuts)) / peak if peak > 0 else 1.0

    if routes:
        min_step = min(grid.cell_width_mm, grid.cell_height_mm)
        stretches = []
        for r in routes:
            (r0, c0, _), (r1, c1, _) = r.path[0], r.path[-1]
            ideal = (abs(r1 - r0) * grid.cell_height_mm
                     + abs(c1 - c0) * grid.cell_width_mm + min_step)
            stretches.append(r.length_mm / ideal)
        avg_stretch = sum(stretches) / len(stretches)
    else:
        avg_stretch = 1.0

    return {
        "total_collisions": total_collisions,
        "max_cell_wires_h": max_h,
        "max_cell_wires_v": max_v,
        "density_uniformity": uniformity,
        "avg_stretch": avg_stretch,
    }
