"""Global channel assignment and cell-level detailed routing.

Load expectations are checked with an oracle that recounts cross-sections
directly from the link list and the stored side assignments, written
independently of the module's own bookkeeping.
"""

import json

import pytest
from hypothesis import given, settings, strategies as st

from nocforge.errors import PipelineError
from nocforge.floorplan import ChannelLoads, compute_spacings, discretize, size_tiles
from nocforge.routing import (
    ABOVE, BELOW, LEFT, RIGHT, H, V,
    GlobalRoute, RoutedLink, detailed_route, global_route, port_cells,
    recompute_loads, routability_metrics,
)
from nocforge.topology import (
    GridDims, Link, Port, Topology, TopologySpec,
    KIND_ROW_SKIP, assign_ports, build_topology,
)

from conftest import make_arch


def build(name, rows, cols, **kw):
    return build_topology(TopologySpec(name=name, **kw), GridDims(rows, cols))


def pipeline(topo, arch):
    g = global_route(topo)
    fp = compute_spacings(size_tiles(arch, topo), g.loads, arch)
    grid = discretize(fp, arch)
    return g, grid, detailed_route(g, grid)


# Small synthetic technologies; tiles of 2x2 and 4x4 unit cells.
def tiny_arch():
    return make_arch(ge_area_coeff=6.4e-7)


def small_arch():
    return make_arch(ge_area_coeff=2.56e-6)


def oracle_loads(t, sides) -> ChannelLoads:
    """Recount per-gap loads from scratch given the side assignments."""
    R, C = t.dims.rows, t.dims.cols

    def row_gap_load(g):
        best = 0
        for x in range(C - 1):
            n = 0
            for i, ln in enumerate(t.links):
                if not ln.is_row_link or ln.span < 2:
                    continue
                hosted = (ln.a[0] == g and sides[i] == ABOVE) or \
                         (ln.a[0] == g - 1 and sides[i] == BELOW)
                if hosted and ln.a[1] <= x < ln.b[1]:
                    n += 1
            best = max(best, n)
        crossed = any(not ln.is_row_link and ln.a[0] < g <= ln.b[0] for ln in t.links)
        return max(best, 1 if crossed else 0)

    def col_gap_load(g):
        best = 0
        for x in range(R - 1):
            n = 0
            for i, ln in enumerate(t.links):
                if ln.is_row_link or ln.span < 2:
                    continue
                hosted = (ln.a[1] == g and sides[i] == LEFT) or \
                         (ln.a[1] == g - 1 and sides[i] == RIGHT)
                if hosted and ln.a[0] <= x < ln.b[0]:
                    n += 1
            best = max(best, n)
        crossed = any(ln.is_row_link and ln.a[1] < g <= ln.b[1] for ln in t.links)
        return max(best, 1 if crossed else 0)

    return ChannelLoads(
        row_gaps=tuple(row_gap_load(g) for g in range(R + 1)),
        col_gaps=tuple(col_gap_load(g) for g in range(C + 1)),
    )


class TestGlobalRoute:
    def test_mesh_gaps_carry_one_crossing_link(self):
        g = global_route(build("mesh", 4, 4))
        assert g.loads.row_gaps == (0, 1, 1, 1, 0)
        assert g.loads.col_gaps == (0, 1, 1, 1, 0)

    @pytest.mark.parametrize("rows,cols", [(2, 2), (3, 5), (7, 4), (12, 12)])
    def test_mesh_interior_always_one(self, rows, cols):
        g = global_route(build("mesh", rows, cols))
        assert g.loads.row_gaps == (0,) + (1,) * (rows - 1) + (0,)
        assert g.loads.col_gaps == (0,) + (1,) * (cols - 1) + (0,)

    def test_ring_stays_within_two(self):
        g = global_route(build("ring", 4, 4))
        assert max(g.loads.row_gaps + g.loads.col_gaps) <= 2
        # The closing column link runs in the left boundary gap.
        assert g.loads.col_gaps[0] == 1

    def test_butterfly_boundary_channel_is_half_the_bisection(self):
        # A full row crosses its own middle 4*4 = 16 times; the greedy halves
        # that per side, and a boundary gap holds exactly one side.
        g = global_route(build("flattened_butterfly", 8, 8))
        assert g.loads.row_gaps[0] == 8
        assert g.loads.row_gaps[-1] == 8
        # Interior gaps stack two rows' sides; never more than the full 16.
        assert all(8 <= x <= 16 for x in g.loads.row_gaps[1:-1])
        assert g.loads.row_gaps == g.loads.col_gaps

    def test_reference_instance_loads(self):
        g = global_route(build("sparse_hamming", 8, 8,
                               s_r=frozenset({4}), s_c=frozenset({2, 5})))
        assert g.loads.row_gaps == (2, 4, 4, 4, 4, 4, 4, 4, 2)
        assert g.loads.col_gaps == (3, 5, 5, 5, 5, 5, 5, 5, 3)

    def test_every_link_gets_a_directional_side(self):
        t = build("sparse_hamming", 5, 6, s_r=frozenset({2, 4}), s_c=frozenset({3}))
        g = global_route(t)
        for i, ln in enumerate(t.links):
            if ln.is_row_link:
                assert g.sides[i] in (ABOVE, BELOW)
            else:
                assert g.sides[i] in (LEFT, RIGHT)

    @settings(max_examples=25, deadline=None)
    @given(rows=st.integers(3, 6), cols=st.integers(3, 6), data=st.data())
    def test_loads_match_recount_oracle(self, rows, cols, data):
        s_r = data.draw(st.sets(st.integers(2, cols - 1)))
        s_c = data.draw(st.sets(st.integers(2, rows - 1)))
        t = build("sparse_hamming", rows, cols, s_r=frozenset(s_r), s_c=frozenset(s_c))
        g = global_route(t)
        assert g.loads == oracle_loads(t, g.sides)
        assert recompute_loads(g) == g.loads

    def test_torus_and_hypercube_against_oracle(self):
        for name in ("torus", "folded_torus", "hypercube"):
            t = build(name, 4, 4)
            g = global_route(t)
            assert g.loads == oracle_loads(t, g.sides), name

    def test_serialization_round_trip(self):
        t = build("sparse_hamming", 4, 4, s_r=frozenset({2}))
        g = global_route(t)
        again = GlobalRoute.from_dict(g.to_dict(), t)
        assert again == g


class TestDetailedRoute:
    @pytest.mark.parametrize("rows,cols", [(2, 2), (4, 4), (3, 7), (12, 12)])
    def test_mesh_routes_straight_and_clean(self, rows, cols):
        arch = tiny_arch()
        topo = build("mesh", rows, cols)
        g, grid, routes = pipeline(topo, arch)
        m = routability_metrics(routes, grid)
        assert m["total_collisions"] == 0
        assert m["density_uniformity"] == 1.0
        assert m["avg_stretch"] == 1.0
        # Every neighbor link crosses exactly its one-cell gap.
        for r in routes:
            assert len(r.path) == 1
            expected = grid.cell_width_mm if topo.links[r.link_index].is_row_link \
                else grid.cell_height_mm
            assert r.length_mm == expected

    def test_paths_connect_the_resolved_port_cells(self):
        arch = small_arch()
        topo = build("sparse_hamming", 4, 4, s_r=frozenset({2}), s_c=frozenset({3}))
        g, grid, routes = pipeline(topo, arch)
        ends = port_cells(g, grid)
        for r in routes:
            a, b = ends[r.link_index]
            assert (r.path[0][0], r.path[0][1]) == a
            assert (r.path[-1][0], r.path[-1][1]) == b

    def test_skip_config_routes_clean_with_roomy_tiles(self):
        g, grid, routes = pipeline(build("sparse_hamming", 4, 4, s_r=frozenset({2})),
                                   small_arch())
        assert routability_metrics(routes, grid)["total_collisions"] == 0

    def test_wire_counts_match_committed_claims(self):
        arch = small_arch()
        topo = build("sparse_hamming", 5, 5, s_r=frozenset({2, 3}), s_c=frozenset({2}))
        g, grid, routes = pipeline(topo, arch)
        h = grid.h_wire_count.copy()
        v = grid.v_wire_count.copy()
        h[:] = 0
        v[:] = 0
        for r in routes:
            claimed = {(rr, cc, d) for rr, cc, d in r.path}
            for i in range(1, len(r.path)):
                pr, pc, pd = r.path[i - 1]
                if r.path[i][2] != pd:
                    claimed.add((pr, pc, r.path[i][2]))
            for rr, cc, d in claimed:
                if d == H:
                    h[rr, cc] += 1
                else:
                    v[rr, cc] += 1
        assert (h == grid.h_wire_count).all()
        assert (v == grid.v_wire_count).all()

    @settings(max_examples=15, deadline=None)
    @given(rows=st.integers(3, 5), cols=st.integers(3, 5), data=st.data())
    def test_path_invariants_hold_for_arbitrary_configs(self, rows, cols, data):
        s_r = data.draw(st.sets(st.integers(2, cols - 1)))
        s_c = data.draw(st.sets(st.integers(2, rows - 1)))
        topo = build("sparse_hamming", rows, cols, s_r=frozenset(s_r), s_c=frozenset(s_c))
        g, grid, routes = pipeline(topo, small_arch())
        for r in routes:
            cells = [(p[0], p[1]) for p in r.path]
            assert len(set(cells)) == len(cells)
            for (r0, c0), (r1, c1) in zip(cells, cells[1:]):
                assert abs(r0 - r1) + abs(c0 - c1) == 1
            for rr, cc in cells:
                assert not grid.is_tile(rr, cc)

    def test_mesh_observed_loads_respect_provisioning(self):
        arch = tiny_arch()
        g, grid, routes = pipeline(build("mesh", 5, 5), arch)
        for gap in range(1, 5):
            band = grid.gap_row_band(gap)
            observed = grid.h_wire_count[band.start:band.stop, :].sum(axis=0).max()
            assert observed <= g.loads.row_gaps[gap]

    def test_determinism_is_byte_exact(self):
        def run():
            topo = build("sparse_hamming", 5, 5, s_r=frozenset({2, 4}), s_c=frozenset({3}))
            g, grid, routes = pipeline(topo, small_arch())
            return json.dumps({"g": g.to_dict(), "r": [r.to_dict() for r in routes],
                               "grid": grid.to_dict()}, sort_keys=True)
        assert run() == run()

    def test_small_faces_overflow_loudly(self):
        # 7 links per face cannot slot into a 2-cell wall.
        with pytest.raises(PipelineError, match="face"):
            pipeline(build("flattened_butterfly", 8, 8), tiny_arch())

    def test_routed_link_round_trip(self):
        g, grid, routes = pipeline(build("mesh", 3, 3), tiny_arch())
        for r in routes:
            assert RoutedLink.from_dict(r.to_dict()) == r


class TestForcedContention:
    def test_parallel_skips_through_one_cell_corridor_collide(self):
        # Two same-side span-2 links on one row share the single free cell
        # over the middle column gap and the port cell below it: entering
        # tile 2's west wall and leaving tile 1's east wall both claim the
        # same vertical slots there. Two shared cells per link, no way out.
        dims = GridDims(1, 4)
        links = (
            Link((0, 0), (0, 2), KIND_ROW_SKIP, param=2),
            Link((0, 1), (0, 3), KIND_ROW_SKIP, param=2),
        )
        topo = assign_ports(Topology(dims=dims, spec=TopologySpec(name="sparse_hamming"),
                                     links=links))
        g = GlobalRoute(
            topology=topo,
            sides=(ABOVE, ABOVE),
            rank_a=(0, 0), rank_b=(0, 0),
            loads=ChannelLoads(row_gaps=(1, 0), col_gaps=(0, 1, 1, 1, 0)),
        )
        arch = tiny_arch()
        fp = compute_spacings(size_tiles(arch, topo), g.loads, arch)
        grid = discretize(fp, arch)
        routes = detailed_route(g, grid)
        assert [r.collisions for r in routes] == [2, 2]
        assert routability_metrics(routes, grid)["total_collisions"] == 4


class TestMetrics:
    def test_empty_routing_is_trivially_uniform(self):
        arch = tiny_arch()
        topo = build("mesh", 2, 2)
        fp = compute_spacings(size_tiles(arch, topo), global_route(topo).loads, arch)
        grid = discretize(fp, arch)
        m = routability_metrics([], grid)
        assert m == {"total_collisions": 0, "max_cell_wires_h": 0,
                     "max_cell_wires_v": 0, "density_uniformity": 1.0,
                     "avg_stretch": 1.0}

    def test_butterfly_density_is_not_uniform(self):
        g, grid, routes = pipeline(build("flattened_butterfly", 4, 4), small_arch())
        m = routability_metrics(routes, grid)
        assert m["density_uniformity"] < 1.0
        assert m["avg_stretch"] >= 1.0
