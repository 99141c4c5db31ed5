"""Technology conversion functions, checked against independent arithmetic.

Expected values are derived with exact fractions here in the tests, not by
running the module under test.
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nocforge.arch import (
    ArchParams, HORIZONTAL, VERTICAL,
    bw_to_wires, ge_to_mm2, load_arch, router_area_ge, wire_delay_s, wires_to_mm,
)
from nocforge.errors import ValidationError

from conftest import EXAMPLE_ARCH_PATH, make_arch


def frac_extent_mm(pitches_nm, wire_count) -> float:
    # Independent oracle: extent = count / sum(1/p) nm, converted to mm.
    density = sum(Fraction(1, int(p)) for p in pitches_nm)
    return float(Fraction(wire_count) / density / Fraction(10 ** 6))


class TestWireExtent:
    def test_three_horizontal_layers_single_wire(self):
        # 40/50/60 nm stack: 1/40+1/50+1/60 = 37/600 wires per nm.
        arch = make_arch(h_layer_pitches_nm=(40.0, 50.0, 60.0))
        expected = frac_extent_mm((40, 50, 60), 1)
        got = wires_to_mm(arch, HORIZONTAL, 1)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(1.6216216e-5, rel=1e-6)

    def test_two_vertical_layers_kilowire(self):
        arch = make_arch(v_layer_pitches_nm=(45.0, 55.0))
        expected = frac_extent_mm((45, 55), 1000)
        got = wires_to_mm(arch, VERTICAL, 1000)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(0.024750, abs=1e-9)

    def test_zero_wires_need_zero_extent(self):
        arch = make_arch()
        assert wires_to_mm(arch, HORIZONTAL, 0) == 0.0

    def test_negative_count_rejected(self):
        with pytest.raises(ValidationError):
            wires_to_mm(make_arch(), HORIZONTAL, -1)

    def test_unknown_direction_rejected(self):
        with pytest.raises(ValidationError):
            wires_to_mm(make_arch(), "diagonal", 1)

    @given(st.integers(1, 10 ** 6))
    def test_linear_in_count(self, n):
        arch = make_arch(h_layer_pitches_nm=(40.0, 50.0, 60.0))
        one = wires_to_mm(arch, HORIZONTAL, 1)
        assert wires_to_mm(arch, HORIZONTAL, n) == pytest.approx(n * one, rel=1e-12)

    @given(st.lists(st.integers(10, 5000), min_size=1, max_size=6),
           st.integers(1, 10000))
    def test_matches_fraction_oracle(self, pitches, count):
        arch = make_arch(h_layer_pitches_nm=tuple(float(p) for p in pitches))
        assert wires_to_mm(arch, HORIZONTAL, count) == pytest.approx(
            frac_extent_mm(pitches, count), rel=1e-9)

    @given(st.lists(st.integers(10, 5000), min_size=1, max_size=5),
           st.integers(10, 5000))
    def test_extra_layer_never_costs_extent(self, pitches, extra):
        base = make_arch(h_layer_pitches_nm=tuple(float(p) for p in pitches))
        more = make_arch(h_layer_pitches_nm=tuple(float(p) for p in pitches) + (float(extra),))
        assert wires_to_mm(more, HORIZONTAL, 100) <= wires_to_mm(base, HORIZONTAL, 100)


class TestBandwidthToWires:
    def test_fractional_wires_round_up(self):
        arch = make_arch(wires_per_bit=1.25, wire_overhead=3)
        assert bw_to_wires(arch, 10) == math.ceil(12.5) + 3 == 16

    def test_plain_one_to_one(self):
        assert bw_to_wires(make_arch(), 512) == 512

    def test_nonpositive_bandwidth_rejected(self):
        with pytest.raises(ValidationError):
            bw_to_wires(make_arch(), 0)

    @given(st.integers(1, 4096), st.integers(1, 4096))
    def test_monotone_in_bandwidth(self, b1, b2):
        arch = make_arch(wires_per_bit=1.5, wire_overhead=2)
        lo, hi = sorted((b1, b2))
        assert bw_to_wires(arch, lo) <= bw_to_wires(arch, hi)


class TestRouterArea:
    def test_pure_quadratic(self):
        arch = make_arch(router_area_coeffs=(1.0, 0.0, 0.0))
        assert router_area_ge(arch, 2, 2, 1) == 16.0

    def test_pure_constant(self):
        arch = make_arch(router_area_coeffs=(0.0, 0.0, 5.0))
        assert router_area_ge(arch, 1, 1, 2) == 10.0

    def test_full_quadratic_against_direct_expansion(self):
        arch = make_arch(router_area_coeffs=(3.0, 7.0, 11.0))
        m, s, b = 4, 6, 32
        assert router_area_ge(arch, m, s, b) == (3 * 100 + 7 * 10 + 11) * 32

    def test_zero_ports_rejected(self):
        with pytest.raises(ValidationError):
            router_area_ge(make_arch(), 0, 1, 8)
        with pytest.raises(ValidationError):
            router_area_ge(make_arch(), 1, 0, 8)

    @given(st.integers(1, 64), st.integers(1, 64))
    def test_monotone_in_ports(self, m, s):
        arch = make_arch(router_area_coeffs=(2.0, 1.0, 4.0))
        assert router_area_ge(arch, m + 1, s, 8) >= router_area_ge(arch, m, s, 8)


class TestAreaAndDelay:
    def test_area_is_linear(self):
        arch = make_arch(ge_area_coeff=0.01)
        assert ge_to_mm2(arch, 100) == pytest.approx(1.0)
        assert ge_to_mm2(arch, 0) == 0.0

    def test_delay_is_linear(self):
        arch = make_arch(wire_delay_coeff=2e-10)
        assert wire_delay_s(arch, 5.0) == pytest.approx(1e-9)


class TestConfigFile:
    def test_example_file_loads_and_round_trips(self):
        arch = load_arch(EXAMPLE_ARCH_PATH)
        assert arch.h_layer_pitches_nm == (40.0, 50.0, 60.0)
        assert arch.v_layer_pitches_nm == (45.0, 55.0)
        again = ArchParams.from_dict(arch.to_dict())
        assert again == arch

    def test_example_file_reproduces_worked_pitch_numbers(self):
        arch = load_arch(EXAMPLE_ARCH_PATH)
        assert wires_to_mm(arch, HORIZONTAL, 1) == pytest.approx(
            frac_extent_mm((40, 50, 60), 1), rel=1e-12)
        assert wires_to_mm(arch, VERTICAL, 1000) == pytest.approx(0.024750, abs=1e-9)

    def test_unknown_field_rejected(self):
        data = load_arch(EXAMPLE_ARCH_PATH).to_dict()
        data["voltage_v"] = 0.8
        with pytest.raises(ValidationError, match="unknown"):
            ArchParams.from_dict(data)

    def test_missing_field_rejected(self):
        data = load_arch(EXAMPLE_ARCH_PATH).to_dict()
        del data["frequency_hz"]
        with pytest.raises(ValidationError, match="missing"):
            ArchParams.from_dict(data)

    @pytest.mark.parametrize("field,value", [
        ("n_tiles", 1),
        ("endpoint_area_ge", 0),
        ("link_bandwidth", 0),
        ("h_layer_pitches_nm", ()),
        ("v_layer_pitches_nm", (0.0,)),
        ("tile_aspect_ratio", -1.0),
        ("wire_overhead", -1),
    ])
    def test_out_of_range_fields_rejected(self, field, value):
        with pytest.raises(ValidationError):
            make_arch(**{field: value})
