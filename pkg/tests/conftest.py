import numpy as np
import pytest

from mleachsim import kernels
from mleachsim.config import SimConfig, validate_config
from mleachsim.metrics import MetricsLog
from mleachsim.simulation import World


def small_config(**overrides) -> SimConfig:
    """A fast, fully valid scenario for integration-level tests."""
    base = dict(
        field_width_m=1200.0,
        field_height_m=1200.0,
        node_count=24,
        bs_position=(600.0, 600.0),
        sim_duration_s=12,
        round_duration_s=2.0,
        initial_energy_j=500.0,
        cluster_radius_rc_m=300.0,
        radio_range_rr_m=900.0,
        traffic_rate_pps=2.0,
        rng_seed=3,
    )
    base.update(overrides)
    return SimConfig(**base)


def make_world(positions, **overrides) -> World:
    """World with hand-placed sensor positions (base station from config).

    Used by protocol unit tests that need exact geometry: the world is
    built normally, then positions are overwritten and distances refreshed.
    """
    pos = np.asarray(positions, dtype=float)
    cfg = small_config(node_count=len(pos), **overrides)
    world = World(validate_config(cfg), MetricsLog("test", cfg.sim_duration_s, len(pos)))
    world.positions[: len(pos)] = pos
    world.dist = kernels.pairwise_distances(world.positions)
    return world


@pytest.fixture
def world_factory():
    return make_world
