import math

import numpy as np

from mleachsim.dsdv import DsdvProtocol
from mleachsim.engine import EventKind
from mleachsim.kernels import NO_ROUTE
from mleachsim.simulation import run_dsdv

from conftest import small_config


def relay_pair(world_factory):
    """Node 1 bridges node 0 to the sink; only node 1 hears the sink."""
    return world_factory(
        [(100.0, 600.0), (500.0, 600.0)], radio_range_rr_m=450.0
    )


def test_fresh_tables_know_only_self(world_factory):
    proto = DsdvProtocol(world_factory([(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)]))
    for i in range(3):
        assert proto.metric[i, i] == 0
        assert proto.seq[i, i] == 0
        assert proto.next_hop[i, i] == i
        assert proto.metric[i, 3] == NO_ROUTE
        assert proto.seq[i, 3] == -1
        assert proto.next_hop[i, 3] == -1


def test_bs_dump_installs_one_hop_routes(world_factory):
    # nodes 0 and 1 hear the sink; node 2 is out of range
    world = world_factory(
        [(500.0, 600.0), (700.0, 600.0), (0.0, 0.0)], radio_range_rr_m=500.0
    )
    proto = DsdvProtocol(world)
    proto._bs_dump(0)
    bs = world.bs_id
    for i in (0, 1):
        assert proto.metric[i, bs] == 1
        assert proto.seq[i, bs] == 2
        assert proto.next_hop[i, bs] == bs
        assert world.ledger.consumed[i] == world.radio.rx_energy(64)
    assert proto.metric[2, bs] == NO_ROUTE
    assert world.ledger.consumed[2] == 0.0


def test_bs_dump_sequence_marches_by_two(world_factory):
    world = world_factory([(500.0, 600.0)])
    proto = DsdvProtocol(world)
    for want in (2, 4, 6):
        proto._bs_dump(0)
        assert proto.bs_seq == want
        assert proto.seq[0, world.bs_id] == want


def test_node_dump_advertises_only_valid_entries(world_factory):
    # lone node: its table holds just itself, so the dump is one entry long
    world = world_factory([(500.0, 600.0)])
    proto = DsdvProtocol(world)
    proto._node_dump(0, 0, 0)
    bits = world.cfg.dsdv_entry_bits
    assert world.ledger.consumed[0] == world.radio.tx_energy(bits, 900.0)
    assert proto.own_seq[0] == 2
    assert proto.seq[0, 0] == 2


def test_node_dump_spreads_routes_one_hop(world_factory):
    world = relay_pair(world_factory)
    proto = DsdvProtocol(world)
    bs = world.bs_id
    proto._bs_dump(0)  # node 1 hears the sink (d=100); node 0 is too far (d=500)
    assert proto.metric[1, bs] == 1
    assert proto.metric[0, bs] == NO_ROUTE
    proto._node_dump(1, 1, 0)
    assert proto.metric[0, bs] == 2
    assert proto.next_hop[0, bs] == 1
    assert proto.seq[0, bs] == proto.seq[1, bs]
    # node 0 also learned a route to node 1 itself
    assert proto.metric[0, 1] == 1
    assert proto.next_hop[0, 1] == 1


def test_send_walks_next_hops_to_the_sink(world_factory):
    world = relay_pair(world_factory)
    proto = DsdvProtocol(world)
    bs = world.bs_id
    proto._bs_dump(0)
    proto._node_dump(1, 1, 0)
    base0 = float(world.ledger.consumed[0])
    base1 = float(world.ledger.consumed[1])
    proto._send(0, 0, 3.5)
    assert world.log.delivered == 1
    hop1 = world.radio.tx_energy(4096, 400.0)
    hop2 = world.radio.rx_energy(4096) + world.radio.tx_energy(4096, 100.0)
    assert math.isclose(world.ledger.consumed[0] - base0, hop1, rel_tol=1e-12)
    assert math.isclose(world.ledger.consumed[1] - base1, hop2, rel_tol=1e-12)


def test_send_without_route_drops_unreachable(world_factory):
    world = world_factory([(500.0, 600.0)])
    proto = DsdvProtocol(world)
    proto._send(0, 0, 1.0)
    assert world.log.dropped_unreachable == 1
    assert world.ledger.consumed[0] == 0.0


def test_send_from_dead_node_counts_dropped_dead(world_factory):
    world = world_factory([(500.0, 600.0)])
    world.ledger.consume(0, world.cfg.initial_energy_j, 0)
    proto = DsdvProtocol(world)
    proto._send(0, 0, 1.0)
    assert world.log.dropped_dead == 1


def test_broken_next_hop_invalidates_route(world_factory):
    world = relay_pair(world_factory)
    proto = DsdvProtocol(world)
    bs = world.bs_id
    proto._bs_dump(0)
    proto._node_dump(1, 1, 0)
    world.ledger.consume(1, world.cfg.initial_energy_j, 0)  # relay dies
    seq_before = proto.seq[0, bs]
    proto._send(0, 0, 2.0)
    assert world.log.dropped_unreachable == 1
    assert world.log.delivered == 0
    assert proto.metric[0, bs] == NO_ROUTE
    assert proto.seq[0, bs] == seq_before + 1
    assert proto.seq[0, bs] % 2 == 1
    # an odd (invalidated) sequence refuses further sends without new info
    proto._send(0, 0, 2.5)
    assert world.log.dropped_unreachable == 2


def test_stale_link_beyond_range_is_broken(world_factory):
    world = relay_pair(world_factory)
    proto = DsdvProtocol(world)
    bs = world.bs_id
    proto._bs_dump(0)
    proto._node_dump(1, 1, 0)
    # relay wandered out of range of node 0 since the tables were built
    world.positions[1] = (100.0 + 1000.0, 600.0 + 900.0)
    from mleachsim import kernels

    world.dist = kernels.pairwise_distances(world.positions)
    proto._send(0, 0, 2.0)
    assert world.log.dropped_unreachable == 1
    assert proto.metric[0, bs] == NO_ROUTE


def test_fresh_bs_dump_repairs_invalidated_route(world_factory):
    world = world_factory([(500.0, 600.0)])
    proto = DsdvProtocol(world)
    bs = world.bs_id
    proto._bs_dump(0)
    proto.seq[0, bs] += 1  # locally invalidated
    proto.metric[0, bs] = NO_ROUTE
    proto._bs_dump(0)  # newer even sequence wins over the odd local mark
    assert proto.seq[0, bs] == 4
    assert proto.metric[0, bs] == 1
    proto._send(0, 0, 9.0)
    assert world.log.delivered == 1


def test_readings_become_jittered_send_events(world_factory):
    world = world_factory([(500.0, 600.0)])
    proto = DsdvProtocol(world)
    proto.on_readings(0, [1.0, 2.0], 3_000_000)
    fired = [world.queue.pop() for _ in range(2)]
    for t_us, kind, payload in sorted(fired):
        assert kind == EventKind.DATA_SEND
        assert 3_000_000 <= t_us < 4_000_000
    assert {p[1] for _, _, p in fired} == {1.0, 2.0}


def test_start_schedules_bs_dumps_and_first_node_dumps(world_factory):
    world = world_factory([(500.0, 600.0), (700.0, 600.0)])
    proto = DsdvProtocol(world)
    proto.start()
    kinds = {}
    while len(world.queue):
        t_us, kind, payload = world.queue.pop()
        kinds.setdefault(kind, []).append(t_us)
    assert len(kinds[EventKind.BS_ROUTE_DUMP]) == world.cfg.sim_duration_s
    assert kinds[EventKind.BS_ROUTE_DUMP][0] == 0
    assert len(kinds[EventKind.ROUTE_DUMP]) == 2
    assert all(0 <= t < proto.interval_us for t in kinds[EventKind.ROUTE_DUMP])


def test_small_run_is_loop_free_and_conserves_packets():
    log = run_dsdv(small_config(), strict=True)
    assert log.generated > 0
    assert log.delivered > 0
    assert log.conservation_residual() == 0


def test_node_dump_reschedules_until_horizon(world_factory):
    world = world_factory([(500.0, 600.0)])
    proto = DsdvProtocol(world)
    proto._node_dump(0, 0, 0)
    assert len(world.queue) == 1
    t_us, kind, payload = world.queue.pop()
    assert kind == EventKind.ROUTE_DUMP
    assert payload == (0, 1)
    assert proto.interval_us <= t_us < 2 * proto.interval_us
    # an interval whose successor would land past the end is not rescheduled
    last = world.cfg.sim_duration_s - 1
    proto._node_dump(last * proto.interval_us, 0, last)
    assert len(world.queue) == 0
