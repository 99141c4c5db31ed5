import os

import pytest

from nocforge.arch import ArchParams, load_arch

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
EXAMPLE_ARCH_PATH = os.path.join(REPO_ROOT, "configs", "arch_example.json")


@pytest.fixture(scope="session")
def example_arch() -> ArchParams:
    """The architecture file shipped with the repo; tests run against the real file."""
    return load_arch(EXAMPLE_ARCH_PATH)


def make_arch(**overrides) -> ArchParams:
    """Small synthetic arch for unit tests; override any field per test."""
    base = dict(
        n_tiles=16,
        endpoint_area_ge=99.0,
        tile_aspect_ratio=1.0,
        frequency_hz=1e9,
        link_bandwidth=4,
        ge_area_coeff=0.01,
        h_layer_pitches_nm=(1000.0,),
        v_layer_pitches_nm=(1000.0,),
        logic_power_coeff=1.0,
        wire_power_coeff=2.0,
        wire_delay_coeff=1e-9,
        wires_per_bit=1.0,
        wire_overhead=0,
        router_area_coeffs=(0.0, 0.0, 0.25),
    )
    base.update(overrides)
    return ArchParams(**base)
