"""Technology and architecture parameters, and the conversion functions built on them.

Everything downstream (floorplanning, wire sizing, cost) goes through the four
converters defined here instead of touching raw coefficients:

    ge_to_mm2       gate equivalents        -> silicon area
    wires_to_mm     parallel wire count     -> stacking extent for one direction
    bw_to_wires     link bandwidth          -> physical wire count
    router_area_ge  router port counts      -> router gate count

Wire geometry works per routing direction: horizontal wires stack vertically
across the horizontal metal layers, vertical wires stack horizontally across
the vertical layers, so each direction carries its own pitch list.
"""

from __future__ import annotations

import json
import math
from dataclasses import MISSING, asdict, dataclass, fields

from .errors import ValidationError

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


@dataclass(frozen=True)
class ArchParams:
    """One architecture + technology operating point.

    Areas are in mm^2, pitches in nm, power coefficients in W/mm^2, wire delay
    in s/mm. ``router_area_coeffs`` is the quadratic (a2, a1, a0) in total port
    count, per bit of link bandwidth.
    """

    n_tiles: int
    endpoint_area_ge: float
    tile_aspect_ratio: float
    frequency_hz: float
    link_bandwidth: int
    ge_area_coeff: float
    h_layer_pitches_nm: tuple[float, ...]
    v_layer_pitches_nm: tuple[float, ...]
    logic_power_coeff: float
    wire_power_coeff: float
    wire_delay_coeff: float
    wires_per_bit: float = 1.0
    wire_overhead: int = 0
    router_area_coeffs: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if int(self.n_tiles) != self.n_tiles or self.n_tiles < 2:
            raise ValidationError("n_tiles must be an integer >= 2")
        for name in ("endpoint_area_ge", "tile_aspect_ratio", "frequency_hz",
                     "ge_area_coeff", "wire_delay_coeff", "wires_per_bit"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0")
        if int(self.link_bandwidth) != self.link_bandwidth or self.link_bandwidth < 1:
            raise ValidationError("link_bandwidth must be an integer >= 1 bit/cycle")
        for name in ("logic_power_coeff", "wire_power_coeff"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if int(self.wire_overhead) != self.wire_overhead or self.wire_overhead < 0:
            raise ValidationError("wire_overhead must be an integer >= 0")
        for name in ("h_layer_pitches_nm", "v_layer_pitches_nm"):
            pitches = getattr(self, name)
            if len(pitches) == 0:
                raise ValidationError(f"{name} needs at least one metal layer")
            if any(p <= 0 for p in pitches):
                raise ValidationError(f"{name} entries must be > 0")
            object.__setattr__(self, name, tuple(float(p) for p in pitches))
        coeffs = self.router_area_coeffs
        if len(coeffs) != 3 or any(c < 0 for c in coeffs):
            raise ValidationError("router_area_coeffs must be three values >= 0")
        object.__setattr__(self, "router_area_coeffs", tuple(float(c) for c in coeffs))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["h_layer_pitches_nm"] = list(self.h_layer_pitches_nm)
        d["v_layer_pitches_nm"] = list(self.v_layer_pitches_nm)
        d["router_area_coeffs"] = list(self.router_area_coeffs)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ArchParams":
        if not isinstance(data, dict):
            raise ValidationError("architecture config must be a JSON object")
        spec_fields = fields(cls)
        known = {f.name for f in spec_fields}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown architecture fields: {sorted(unknown)}")
        missing = {f.name for f in spec_fields
                   if f.name not in data and f.default is MISSING}
        if missing:
            raise ValidationError(f"missing architecture fields: {sorted(missing)}")
        kwargs = dict(data)
        for name in ("h_layer_pitches_nm", "v_layer_pitches_nm", "router_area_coeffs"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)


def load_arch(path: str) -> ArchParams:
    """Load and validate an ArchParams JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read architecture file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"architecture file is not valid JSON: {exc}") from exc
    return ArchParams.from_dict(data)


def save_arch(arch: ArchParams, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(arch.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def ge_to_mm2(arch: ArchParams, x_ge: float) -> float:
    """Silicon area of ``x_ge`` gate equivalents, in mm^2. Linear by design."""
    if x_ge < 0:
        raise ValidationError("gate count must be >= 0")
    return x_ge * arch.ge_area_coeff


def wires_to_mm(arch: ArchParams, direction: str, wire_count: float) -> float:
    """Extent needed to stack ``wire_count`` parallel wires of one direction.

    Horizontal wires spread over the horizontal metal layers and consume
    vertical extent (and vice versa); with per-layer pitches p_i in nm the
    density is sum(1/p_i) wires per nm, so the extent in mm is

        wire_count * 1e-6 / sum(1/p_i)

    Zero wires need zero extent.
    """
    if wire_count < 0:
        raise ValidationError("wire_count must be >= 0")
    if direction == HORIZONTAL:
        pitches = arch.h_layer_pitches_nm
    elif direction == VERTICAL:
        pitches = arch.v_layer_pitches_nm
    else:
        raise ValidationError(f"direction must be '{HORIZONTAL}' or '{VERTICAL}'")
    if wire_count == 0:
        return 0.0
    density_per_nm = sum(1.0 / p for p in pitches)
    return wire_count * 1e-6 / density_per_nm


def bw_to_wires(arch: ArchParams, bandwidth_bits: int) -> int:
    """Physical wires for a link of ``bandwidth_bits`` bits/cycle.

    ceil(bits * wires_per_bit) plus a flat per-link overhead for flow control
    and framing.
    """
    if bandwidth_bits <= 0:
        raise ValidationError("bandwidth must be > 0 bits/cycle")
    return math.ceil(bandwidth_bits * arch.wires_per_bit) + arch.wire_overhead


def router_area_ge(arch: ArchParams, m: int, s: int, bandwidth_bits: int) -> float:
    """Gate count of a router with m manager and s subordinate ports.

    Quadratic in total port count (the crossbar dominates), linear in link
    bandwidth: (a2*(m+s)^2 + a1*(m+s) + a0) * B.
    """
    if int(m) != m or int(s) != s or m < 1 or s < 1:
        raise ValidationError("router needs at least one manager and one subordinate port")
    if bandwidth_bits <= 0:
        raise ValidationError("bandwidth must be > 0 bits/cycle")
    a2, a1, a0 = arch.router_area_coeffs
    ports = m + s
    return (a2 * ports * ports + a1 * ports + a0) * bandwidth_bits


def wire_delay_s(arch: ArchParams, length_mm: float) -> float:
    """Signal propagation delay over ``length_mm`` of wire, in seconds."""
    if length_mm < 0:
        raise ValidationError("wire length must be >= 0")
    return length_mm * arch.wire_delay_coeff
