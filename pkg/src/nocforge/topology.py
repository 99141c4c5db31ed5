"""Tile-grid topology construction.

All topologies live on an R x C grid of tiles and use only row-aligned or
column-aligned links, so every family shares one floorplanning and routing
model downstream. The central family is the sparse Hamming grid: a 2D mesh
plus optional per-row skip links at the offsets in ``s_r`` (applied uniformly
to every row) and per-column skips at the offsets in ``s_c``. Its two extremes
recover the classic references:

    s_r = {}          s_c = {}          -> 2D mesh
    s_r = {2..C-1}    s_c = {2..R-1}    -> flattened butterfly

Reference generators for ring, torus, folded torus, and hypercube are provided
for comparison studies. Construction is deterministic: links come out sorted
by endpoint coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ValidationError

NORTH, SOUTH, EAST, WEST = "north", "south", "east", "west"

KIND_MESH = "mesh"
KIND_ROW_SKIP = "row_skip"
KIND_COL_SKIP = "col_skip"
KIND_WRAPAROUND = "wraparound"
KIND_HYPERCUBE = "hypercube_dim"

TOPOLOGY_NAMES = ("mesh", "ring", "torus", "folded_torus", "hypercube",
                  "flattened_butterfly", "sparse_hamming")


@dataclass(frozen=True)
class GridDims:
    """Grid extent in tiles. Rows grow downward, columns to the right."""

    rows: int
    cols: int

    def __post_init__(self):
        if int(self.rows) != self.rows or int(self.cols) != self.cols:
            raise ValidationError("grid dims must be integers")
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("grid dims must be >= 1")

    @property
    def n_tiles(self) -> int:
        return self.rows * self.cols

    def to_dict(self) -> dict:
        return {"rows": self.rows, "cols": self.cols}

    @classmethod
    def from_dict(cls, d: dict) -> "GridDims":
        return cls(rows=d["rows"], cols=d["cols"])


@dataclass(frozen=True)
class Port:
    """A physical attachment point on one tile face.

    ``index`` ranks the ports sharing a face by destination distance,
    shortest first; the floorplan turns it into a concrete wall slot.
    """

    face: str
    index: int

    def to_dict(self) -> dict:
        return {"face": self.face, "index": self.index}

    @classmethod
    def from_dict(cls, d: dict) -> "Port":
        return cls(face=d["face"], index=d["index"])


@dataclass(frozen=True)
class Link:
    """Bidirectional link between tiles ``a`` and ``b`` (lexicographic a < b).

    ``param`` carries the skip offset for row/col skips and the flipped bit
    index for hypercube links; it is None for mesh and wraparound links.
    """

    a: tuple[int, int]
    b: tuple[int, int]
    kind: str
    param: int | None = None
    port_a: Port | None = None
    port_b: Port | None = None

    def __post_init__(self):
        if self.a >= self.b:
            raise ValidationError(f"link endpoints must satisfy a < b, got {self.a} >= {self.b}")
        if self.a[0] != self.b[0] and self.a[1] != self.b[1]:
            raise ValidationError(f"link {self.a}-{self.b} is not row- or column-aligned")

    @property
    def is_row_link(self) -> bool:
        return self.a[0] == self.b[0]

    @property
    def span(self) -> int:
        """Distance between the endpoints in tile pitches along the link axis."""
        return abs(self.b[1] - self.a[1]) if self.is_row_link else abs(self.b[0] - self.a[0])

    def to_dict(self) -> dict:
        d = {"a": list(self.a), "b": list(self.b), "kind": self.kind, "param": self.param}
        if self.port_a is not None:
            d["port_a"] = self.port_a.to_dict()
        if self.port_b is not None:
            d["port_b"] = self.port_b.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Link":
        return cls(
            a=tuple(d["a"]), b=tuple(d["b"]), kind=d["kind"], param=d.get("param"),
            port_a=Port.from_dict(d["port_a"]) if d.get("port_a") else None,
            port_b=Port.from_dict(d["port_b"]) if d.get("port_b") else None,
        )


@dataclass(frozen=True)
class TopologySpec:
    """Family name plus the skip sets (empty for non-sparse-Hamming families)."""

    name: str
    s_r: frozenset[int] = frozenset()
    s_c: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.name not in TOPOLOGY_NAMES:
            raise ValidationError(f"unknown topology '{self.name}', expected one of {TOPOLOGY_NAMES}")
        object.__setattr__(self, "s_r", frozenset(int(x) for x in self.s_r))
        object.__setattr__(self, "s_c", frozenset(int(x) for x in self.s_c))

    def to_dict(self) -> dict:
        return {"name": self.name, "s_r": sorted(self.s_r), "s_c": sorted(self.s_c)}

    @classmethod
    def from_dict(cls, d: dict) -> "TopologySpec":
        return cls(name=d["name"], s_r=frozenset(d.get("s_r", ())), s_c=frozenset(d.get("s_c", ())))


@dataclass(frozen=True)
class Topology:
    dims: GridDims
    spec: TopologySpec
    links: tuple[Link, ...]

    def tiles(self):
        for r in range(self.dims.rows):
            for c in range(self.dims.cols):
                yield (r, c)

    def adjacency(self) -> dict[tuple[int, int], list[tuple[int, int]]]:
        adj: dict[tuple[int, int], list[tuple[int, int]]] = {t: [] for t in self.tiles()}
        for ln in self.links:
            adj[ln.a].append(ln.b)
            adj[ln.b].append(ln.a)
        for nbrs in adj.values():
            nbrs.sort()
        return adj

    def to_dict(self) -> dict:
        return {
            "dims": self.dims.to_dict(),
            "spec": self.spec.to_dict(),
            "links": [ln.to_dict() for ln in self.links],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Topology":
        return cls(
            dims=GridDims.from_dict(d["dims"]),
            spec=TopologySpec.from_dict(d["spec"]),
            links=tuple(Link.from_dict(x) for x in d["links"]),
        )


def _sorted_links(links) -> tuple[Link, ...]:
    return tuple(sorted(links, key=lambda ln: (ln.a, ln.b, ln.kind, ln.param or 0)))


def _check_pipeline_dims(dims: GridDims) -> None:
    # Degenerate 1 x k grids are allowed as hand-built analysis graphs but
    # not as construction targets: the floorplan model needs both axes.
    if dims.rows < 2 or dims.cols < 2:
        raise ValidationError("topology construction needs rows >= 2 and cols >= 2")


# ---------------------------------------------------------------- families

def build_sparse_hamming(dims: GridDims, s_r=frozenset(), s_c=frozenset(),
                         name: str = "sparse_hamming") -> Topology:
    """Mesh plus uniform row skips at offsets ``s_r`` and column skips ``s_c``.

    Offsets must lie in {2..cols-1} for rows and {2..rows-1} for columns;
    offset 1 is already the mesh and anything >= the grid extent cannot fit.
    """
    _check_pipeline_dims(dims)
    R, C = dims.rows, dims.cols
    s_r = frozenset(int(x) for x in s_r)
    s_c = frozenset(int(x) for x in s_c)
    bad_r = [x for x in s_r if not 2 <= x <= C - 1]
    bad_c = [x for x in s_c if not 2 <= x <= R - 1]
    if bad_r:
        raise ValidationError(f"row skip offsets must be in 2..{C - 1}, got {sorted(bad_r)}")
    if bad_c:
        raise ValidationError(f"column skip offsets must be in 2..{R - 1}, got {sorted(bad_c)}")

    links = []
    for r in range(R):
        for c in range(C - 1):
            links.append(Link((r, c), (r, c + 1), KIND_MESH))
    for r in range(R - 1):
        for c in range(C):
            links.append(Link((r, c), (r + 1, c), KIND_MESH))
    for x in sorted(s_r):
        for r in range(R):
            for c in range(C - x):
                links.append(Link((r, c), (r, c + x), KIND_ROW_SKIP, param=x))
    for x in sorted(s_c):
        for c in range(C):
            for r in range(R - x):
                links.append(Link((r, c), (r + x, c), KIND_COL_SKIP, param=x))
    spec = TopologySpec(name=name, s_r=s_r, s_c=s_c)
    return Topology(dims=dims, spec=spec, links=_sorted_links(links))


def build_mesh(dims: GridDims) -> Topology:
    t = build_sparse_hamming(dims, name="mesh")
    return t


def build_flattened_butterfly(dims: GridDims) -> Topology:
    """Fully connected rows and columns: the dense limit of the sparse family."""
    full_r = frozenset(range(2, dims.cols))
    full_c = frozenset(range(2, dims.rows))
    return build_sparse_hamming(dims, full_r, full_c, name="flattened_butterfly")


def ring_order(dims: GridDims) -> list[tuple[int, int]]:
    """Tile visiting order of the ring cycle.

    Even row counts use a plain boustrophedon sweep closed by one long column
    link. Odd row counts sweep columns 0..C-2, pick up the last column on the
    way back up, and close with one long row link; every move stays axis
    aligned either way.
    """
    R, C = dims.rows, dims.cols
    order = []
    if R % 2 == 0:
        for r in range(R):
            cols = range(C) if r % 2 == 0 else range(C - 1, -1, -1)
            order.extend((r, c) for c in cols)
    else:
        for r in range(R):
            cols = range(C - 1) if r % 2 == 0 else range(C - 2, -1, -1)
            order.extend((r, c) for c in cols)
        order.append((R - 1, C - 1))
        order.extend((r, C - 1) for r in range(R - 2, -1, -1))
    return order


def build_ring(dims: GridDims) -> Topology:
    """One cycle through every tile, radix 2."""
    _check_pipeline_dims(dims)
    order = ring_order(dims)
    links = []
    n = len(order)
    for i in range(n):
        u, v = order[i], order[(i + 1) % n]
        a, b = (u, v) if u < v else (v, u)
        span = abs(a[0] - b[0]) + abs(a[1] - b[1])
        kind = KIND_MESH if span == 1 else KIND_WRAPAROUND
        links.append(Link(a, b, kind))
    spec = TopologySpec(name="ring")
    return Topology(dims=dims, spec=spec, links=_sorted_links(links))


def build_torus(dims: GridDims) -> Topology:
    """Mesh plus one wraparound link per row and per column.

    On 2-wide axes the wraparound would duplicate the mesh link and is
    dropped; links are unique by construction everywhere else.
    """
    _check_pipeline_dims(dims)
    R, C = dims.rows, dims.cols
    links = list(build_mesh(dims).links)
    if C > 2:
        for r in range(R):
            links.append(Link((r, 0), (r, C - 1), KIND_WRAPAROUND))
    if R > 2:
        for c in range(C):
            links.append(Link((0, c), (R - 1, c), KIND_WRAPAROUND))
    spec = TopologySpec(name="torus")
    return Topology(dims=dims, spec=spec, links=_sorted_links(links))


def _folded_cycle(n: int) -> list[int]:
    # Interleaved fold of a length-n cycle: 0, 2, 4, ..., 5, 3, 1. Consecutive
    # entries are at most 2 apart, which is the whole point of folding.
    return list(range(0, n, 2)) + list(range(n - 1 - (n % 2), 0, -2))


def build_folded_torus(dims: GridDims) -> Topology:
    """Torus with each row/column cycle folded so no link spans more than 2."""
    _check_pipeline_dims(dims)
    R, C = dims.rows, dims.cols
    links = set()
    for r in range(R):
        cyc = _folded_cycle(C)
        for i in range(C):
            c1, c2 = cyc[i], cyc[(i + 1) % C]
            if c1 == c2:
                continue
            a, b = min(c1, c2), max(c1, c2)
            span = b - a
            kind = KIND_MESH if span == 1 else KIND_ROW_SKIP
            links.add(Link((r, a), (r, b), kind, param=span if span > 1 else None))
    for c in range(C):
        cyc = _folded_cycle(R)
        for i in range(R):
            r1, r2 = cyc[i], cyc[(i + 1) % R]
            if r1 == r2:
                continue
            a, b = min(r1, r2), max(r1, r2)
            span = b - a
            kind = KIND_MESH if span == 1 else KIND_COL_SKIP
            links.add(Link((a, c), (b, c), kind, param=span if span > 1 else None))
    spec = TopologySpec(name="folded_torus")
    return Topology(dims=dims, spec=spec, links=_sorted_links(links))


def build_hypercube(dims: GridDims) -> Topology:
    """Binary hypercube over tile IDs row*C + col.

    Needs both dims to be powers of two so every bit flip stays row- or
    column-aligned: low bits address the column, high bits the row.
    """
    _check_pipeline_dims(dims)
    R, C = dims.rows, dims.cols
    if R & (R - 1) or C & (C - 1):
        raise ValidationError("R and C must be powers of two")
    col_bits = C.bit_length() - 1
    n = R * C
    dim_count = n.bit_length() - 1
    links = []
    for tid in range(n):
        for k in range(dim_count):
            other = tid ^ (1 << k)
            if other < tid:
                continue
            a = (tid // C, tid % C)
            b = (other // C, other % C)
            links.append(Link(a, b, KIND_HYPERCUBE, param=k))
    spec = TopologySpec(name="hypercube")
    return Topology(dims=dims, spec=spec, links=_sorted_links(links))


_BUILDERS = {
    "mesh": build_mesh,
    "ring": build_ring,
    "torus": build_torus,
    "folded_torus": build_folded_torus,
    "hypercube": build_hypercube,
    "flattened_butterfly": build_flattened_butterfly,
}


def build_topology(spec: TopologySpec, dims: GridDims) -> Topology:
    """Dispatch to the family builder and attach ports."""
    if spec.name == "sparse_hamming":
        t = build_sparse_hamming(dims, spec.s_r, spec.s_c)
    else:
        if spec.s_r or spec.s_c:
            raise ValidationError(f"skip sets are only meaningful for sparse_hamming, not '{spec.name}'")
        t = _BUILDERS[spec.name](dims)
    return assign_ports(t)


# ------------------------------------------------------------------ ports

def assign_ports(t: Topology) -> Topology:
    """Return a copy of ``t`` with a port on each link endpoint.

    Row links leave through the east face of the lower-numbered column and
    enter the west face of the higher one; column links use south/north the
    same way, so every link runs toward the grid interior. Ports sharing a
    face are indexed by destination distance, shortest first.
    """
    by_face: dict[tuple[tuple[int, int], str], list[tuple[int, int, bool]]] = {}
    for i, ln in enumerate(t.links):
        if ln.is_row_link:
            fa, fb = EAST, WEST
        else:
            fa, fb = SOUTH, NORTH
        by_face.setdefault((ln.a, fa), []).append((ln.span, i, True))
        by_face.setdefault((ln.b, fb), []).append((ln.span, i, False))

    ports: dict[tuple[int, bool], Port] = {}
    for (tile, face), entries in by_face.items():
        entries.sort()
        for index, (_span, link_i, is_a) in enumerate(entries):
            ports[(link_i, is_a)] = Port(face=face, index=index)

    new_links = []
    for i, ln in enumerate(t.links):
        new_links.append(replace(ln, port_a=ports[(i, True)], port_b=ports[(i, False)]))
    return replace(t, links=tuple(new_links))


# ---------------------------------------------------------------- analysis

def diameter(t: Topology) -> int:
    """Longest shortest path in hops, by repeated BFS."""
    adj = t.adjacency()
    tiles = list(adj)
    if len(tiles) < 2:
        raise ValidationError("diameter needs at least two tiles")
    worst = 0
    for src in tiles:
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if len(dist) != len(tiles):
            raise ValidationError("graph is disconnected")
        worst = max(worst, max(dist.values()))
    return worst


def max_radix(t: Topology) -> int:
    """Largest per-tile link count; endpoint/local ports are not counted."""
    degree: dict[tuple[int, int], int] = {}
    for ln in t.links:
        degree[ln.a] = degree.get(ln.a, 0) + 1
        degree[ln.b] = degree.get(ln.b, 0) + 1
    return max(degree.values()) if degree else 0


def config_count(dims: GridDims) -> int:
    """Number of distinct sparse Hamming configurations on this grid."""
    _check_pipeline_dims(dims)
    return 2 ** ((dims.cols - 2) + (dims.rows - 2))
