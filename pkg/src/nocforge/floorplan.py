"""Physical layout of the tile grid.

Three stages: size all tiles from the worst-case router (every tile gets the
same footprint so the grid stays regular), widen the inter-tile gaps to fit
the link counts the global router assigned to each channel, and discretize
the result into unit cells sized so one cell carries exactly one horizontal
and one vertical link of the configured bandwidth.

Cell rows run top to bottom in the same direction as tile rows. The layout
along each axis alternates gap and tile bands:

    gap 0 | tile 0 | gap 1 | tile 1 | ... | tile R-1 | gap R

Boundary gaps (0 and R) are only nonzero if some link is routed there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .arch import ArchParams, HORIZONTAL, VERTICAL, bw_to_wires, ge_to_mm2, router_area_ge, wires_to_mm
from .errors import ValidationError
from .topology import GridDims, Topology, max_radix

# Guard against float fuzz when a length is an exact multiple of the cell
# pitch; without it ceil() would add a phantom cell row.
_CEIL_EPS = 1e-9


def _cells(length_mm: float, pitch_mm: float) -> int:
    if length_mm <= 0.0:
        return 0
    return math.ceil(length_mm / pitch_mm - _CEIL_EPS)


@dataclass(frozen=True)
class ChannelLoads:
    """Per-gap parallel link counts from global routing.

    ``row_gaps[i]`` is the load of the horizontal channel above tile row i
    (index R = below the last row); ``col_gaps`` reads the same way left to
    right.
    """

    row_gaps: tuple[int, ...]
    col_gaps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "row_gaps", tuple(int(x) for x in self.row_gaps))
        object.__setattr__(self, "col_gaps", tuple(int(x) for x in self.col_gaps))
        if any(x < 0 for x in self.row_gaps + self.col_gaps):
            raise ValidationError("channel loads must be nonnegative")

    def to_dict(self) -> dict:
        return {"row_gaps": list(self.row_gaps), "col_gaps": list(self.col_gaps)}

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelLoads":
        return cls(row_gaps=tuple(d["row_gaps"]), col_gaps=tuple(d["col_gaps"]))


@dataclass(frozen=True)
class Floorplan:
    """Tile footprint plus gap widths; gaps stay None until spacing runs."""

    dims: GridDims
    tile_height_mm: float
    tile_width_mm: float
    tile_area_ge: float
    router_area_ge: float
    row_gaps_mm: tuple[float, ...] | None = None
    col_gaps_mm: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.tile_height_mm) and self.tile_height_mm > 0):
            raise ValidationError(f"tile height must be positive and finite, got {self.tile_height_mm}")
        if not (math.isfinite(self.tile_width_mm) and self.tile_width_mm > 0):
            raise ValidationError(f"tile width must be positive and finite, got {self.tile_width_mm}")
        if self.row_gaps_mm is not None:
            if len(self.row_gaps_mm) != self.dims.rows + 1:
                raise ValidationError("row gap list must have rows+1 entries")
            if any(g < 0 for g in self.row_gaps_mm):
                raise ValidationError("gaps must be nonnegative")
        if self.col_gaps_mm is not None:
            if len(self.col_gaps_mm) != self.dims.cols + 1:
                raise ValidationError("column gap list must have cols+1 entries")
            if any(g < 0 for g in self.col_gaps_mm):
                raise ValidationError("gaps must be nonnegative")

    @property
    def aspect_ratio(self) -> float:
        return self.tile_height_mm / self.tile_width_mm

    def to_dict(self) -> dict:
        return {
            "dims": self.dims.to_dict(),
            "tile_height_mm": self.tile_height_mm,
            "tile_width_mm": self.tile_width_mm,
            "tile_area_ge": self.tile_area_ge,
            "router_area_ge": self.router_area_ge,
            "row_gaps_mm": list(self.row_gaps_mm) if self.row_gaps_mm is not None else None,
            "col_gaps_mm": list(self.col_gaps_mm) if self.col_gaps_mm is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Floorplan":
        return cls(
            dims=GridDims.from_dict(d["dims"]),
            tile_height_mm=d["tile_height_mm"],
            tile_width_mm=d["tile_width_mm"],
            tile_area_ge=d["tile_area_ge"],
            router_area_ge=d["router_area_ge"],
            row_gaps_mm=tuple(d["row_gaps_mm"]) if d.get("row_gaps_mm") is not None else None,
            col_gaps_mm=tuple(d["col_gaps_mm"]) if d.get("col_gaps_mm") is not None else None,
        )


@dataclass(frozen=True)
class Band:
    """One horizontal or vertical strip of the cell grid; gaps may be empty."""

    kind: str   # "tile" or "gap"
    index: int  # tile row/col, or gap number (gap i precedes tile i)
    start: int  # first cell row/col
    size: int

    @property
    def stop(self) -> int:
        return self.start + self.size


class UnitCellGrid:
    """Dense cell grid with per-cell occupancy and routed wire counts.

    ``occupancy`` is True on tile cells, which are off-limits to routing.
    Wire counts start at zero and are filled in by detailed routing; they
    count links whose path enters the cell travelling in that direction.
    """

    def __init__(self, cell_height_mm: float, cell_width_mm: float,
                 row_bands: tuple[Band, ...], col_bands: tuple[Band, ...]):
        if cell_height_mm <= 0 or cell_width_mm <= 0:
            raise ValidationError("unit cells must have positive size")
        self.cell_height_mm = cell_height_mm
        self.cell_width_mm = cell_width_mm
        self.row_bands = row_bands
        self.col_bands = col_bands
        self.n_rows = row_bands[-1].stop
        self.n_cols = col_bands[-1].stop
        if self.n_rows <= 0 or self.n_cols <= 0:
            raise ValidationError("cell grid is degenerate")
        self.occupancy = np.zeros((self.n_rows, self.n_cols), dtype=bool)
        for rb in row_bands:
            if rb.kind != "tile":
                continue
            for cb in col_bands:
                if cb.kind == "tile":
                    self.occupancy[rb.start:rb.stop, cb.start:cb.stop] = True
        self.h_wire_count = np.zeros((self.n_rows, self.n_cols), dtype=np.int32)
        self.v_wire_count = np.zeros((self.n_rows, self.n_cols), dtype=np.int32)
        self._row_band_by_tile = {b.index: b for b in row_bands if b.kind == "tile"}
        self._col_band_by_tile = {b.index: b for b in col_bands if b.kind == "tile"}
        self._row_band_by_gap = {b.index: b for b in row_bands if b.kind == "gap"}
        self._col_band_by_gap = {b.index: b for b in col_bands if b.kind == "gap"}

    @property
    def tile_rows(self) -> int:
        """Cell rows per tile block."""
        return self._row_band_by_tile[0].size

    @property
    def tile_cols(self) -> int:
        return self._col_band_by_tile[0].size

    def tile_band(self, tile: tuple[int, int]) -> tuple[Band, Band]:
        return self._row_band_by_tile[tile[0]], self._col_band_by_tile[tile[1]]

    def gap_row_band(self, gap: int) -> Band:
        return self._row_band_by_gap[gap]

    def gap_col_band(self, gap: int) -> Band:
        return self._col_band_by_gap[gap]

    def is_tile(self, cell_row: int, cell_col: int) -> bool:
        return bool(self.occupancy[cell_row, cell_col])

    def __eq__(self, other):
        if not isinstance(other, UnitCellGrid):
            return NotImplemented
        return (self.cell_height_mm == other.cell_height_mm
                and self.cell_width_mm == other.cell_width_mm
                and self.row_bands == other.row_bands
                and self.col_bands == other.col_bands
                and np.array_equal(self.h_wire_count, other.h_wire_count)
                and np.array_equal(self.v_wire_count, other.v_wire_count))

    def to_dict(self) -> dict:
        return {
            "cell_height_mm": self.cell_height_mm,
            "cell_width_mm": self.cell_width_mm,
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "row_bands": [[b.kind, b.index, b.start, b.size] for b in self.row_bands],
            "col_bands": [[b.kind, b.index, b.start, b.size] for b in self.col_bands],
            "h_wire_rle": _rle_encode(self.h_wire_count),
            "v_wire_rle": _rle_encode(self.v_wire_count),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UnitCellGrid":
        grid = cls(
            cell_height_mm=d["cell_height_mm"],
            cell_width_mm=d["cell_width_mm"],
            row_bands=tuple(Band(*b) for b in d["row_bands"]),
            col_bands=tuple(Band(*b) for b in d["col_bands"]),
        )
        shape = (grid.n_rows, grid.n_cols)
        grid.h_wire_count = _rle_decode(d["h_wire_rle"], shape)
        grid.v_wire_count = _rle_decode(d["v_wire_rle"], shape)
        return grid


def _rle_encode(arr: np.ndarray) -> list[int]:
    # Flat [value, run, value, run, ...] pairs, row-major.
    flat = arr.ravel()
    out: list[int] = []
    if flat.size == 0:
        return out
    breaks = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], breaks))
    ends = np.concatenate((breaks, [flat.size]))
    for s, e in zip(starts, ends):
        out.extend((int(flat[s]), int(e - s)))
    return out


def _rle_decode(pairs: list[int], shape: tuple[int, int]) -> np.ndarray:
    values = pairs[0::2]
    runs = pairs[1::2]
    flat = np.repeat(np.asarray(values, dtype=np.int32), runs)
    if flat.size != shape[0] * shape[1]:
        raise ValidationError("run-length data does not match grid shape")
    return flat.reshape(shape)


# ------------------------------------------------------------------- stages

def size_tiles(arch: ArchParams, t: Topology) -> Floorplan:
    """Uniform tile footprint from the endpoint plus the worst-case router.

    Every tile is sized for the maximum-radix router in the topology (plus
    one port pair for the local endpoint) so the grid stays regular; the
    aspect ratio requested by the architecture is applied exactly.
    """
    ports = max_radix(t) + 1
    a_router = router_area_ge(arch, ports, ports, arch.link_bandwidth)
    a_tile = arch.endpoint_area_ge + a_router
    area_mm2 = ge_to_mm2(arch, a_tile)
    height = math.sqrt(arch.tile_aspect_ratio * area_mm2)
    width = math.sqrt(area_mm2 / arch.tile_aspect_ratio)
    if not (math.isfinite(height) and math.isfinite(width)):
        raise ValidationError("tile sizing produced non-finite dimensions")
    return Floorplan(
        dims=t.dims,
        tile_height_mm=height,
        tile_width_mm=width,
        tile_area_ge=a_tile,
        router_area_ge=a_router,
    )


def compute_spacings(fp: Floorplan, channel_loads: ChannelLoads, arch: ArchParams) -> Floorplan:
    """Widen each gap to hold its assigned links side by side.

    A horizontal channel carrying N parallel links needs the vertical extent
    of N*bw_to_wires(B) stacked horizontal wires; empty channels collapse to
    zero width.
    """
    if len(channel_loads.row_gaps) != fp.dims.rows + 1:
        raise ValidationError("row gap loads must have rows+1 entries")
    if len(channel_loads.col_gaps) != fp.dims.cols + 1:
        raise ValidationError("column gap loads must have cols+1 entries")
    wires = bw_to_wires(arch, arch.link_bandwidth)
    row_gaps = tuple(wires_to_mm(arch, HORIZONTAL, n * wires) for n in channel_loads.row_gaps)
    col_gaps = tuple(wires_to_mm(arch, VERTICAL, n * wires) for n in channel_loads.col_gaps)
    return replace(fp, row_gaps_mm=row_gaps, col_gaps_mm=col_gaps)


def discretize(fp: Floorplan, arch: ArchParams) -> UnitCellGrid:
    """Quantize the floorplan into unit cells, rounding every extent up.

    Ceiling quantization wastes at most one cell pitch per band but keeps
    the capacity guarantee: a gap sized for N links always discretizes to
    at least N free cell rows.
    """
    if fp.row_gaps_mm is None or fp.col_gaps_mm is None:
        raise ValidationError("floorplan gaps are unset; run compute_spacings first")
    wires = bw_to_wires(arch, arch.link_bandwidth)
    cell_h = wires_to_mm(arch, HORIZONTAL, wires)
    cell_w = wires_to_mm(arch, VERTICAL, wires)
    if cell_h <= 0 or cell_w <= 0:
        raise ValidationError("unit cell has zero size")

    tile_rows = _cells(fp.tile_height_mm, cell_h)
    tile_cols = _cells(fp.tile_width_mm, cell_w)
    if tile_rows == 0 or tile_cols == 0:
        raise ValidationError("tile smaller than one unit cell")

    def axis_bands(count: int, gaps_mm, tile_cells: int, pitch: float) -> tuple[Band, ...]:
        bands = []
        pos = 0
        for i in range(count):
            g = _cells(gaps_mm[i], pitch)
            bands.append(Band("gap", i, pos, g))
            pos += g
            bands.append(Band("tile", i, pos, tile_cells))
            pos += tile_cells
        g = _cells(gaps_mm[count], pitch)
        bands.append(Band("gap", count, pos, g))
        return tuple(bands)

    row_bands = axis_bands(fp.dims.rows, fp.row_gaps_mm, tile_rows, cell_h)
    col_bands = axis_bands(fp.dims.cols, fp.col_gaps_mm, tile_cols, cell_w)
    return UnitCellGrid(cell_h, cell_w, row_bands, col_bands)
