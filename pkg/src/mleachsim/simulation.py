"""World assembly and the event loop shared by both protocols.

A run owns: node positions (base station as the final row), the energy
ledger, random-waypoint mobility, On-Off traffic, a per-second pairwise
distance matrix, and the event queue. Protocol objects plug into the loop
through start/on_readings/handle/finish. Strict mode layers invariant
checks over a run and raises InvariantViolation on the first breach.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .config import SimConfig, validate_config
from .engine import US, EventKind, EventQueue, RandomStreams
from .metrics import MetricsLog
from .mobility import MobilityField
from .model import NodeState, Role, place_nodes
from .radio import EnergyLedger, RadioModel
from .traffic import OnOffTraffic


class InvariantViolation(RuntimeError):
    """A structural invariant failed during a strict-mode run."""


class BsChannel:
    """Shared-medium contention at the base station receiver (optional).

    Models the sink-side bottleneck: the radio link itself is lossless, but
    when everyone funnels data into one receiver the MAC around it saturates.
    Arrivals are tallied per second into an exponential moving average
    L_t = (L_{t-1} + bits_t) / 2; a data frame is received with probability
    exp(-(L/C)^k), so losses are negligible below capacity C and collapse
    sharply above it (k controls how sharp). Disabled when capacity is 0:
    then every in-range frame is received and no randomness is drawn.
    Control broadcasts are not affected; only unicast data at the sink.
    """

    def __init__(self, capacity_bps: float, collapse_k: float, stream) -> None:
        self.enabled = capacity_bps > 0.0
        self.capacity_bps = capacity_bps
        self.collapse_k = collapse_k
        self.stream = stream
        self.load_ema = 0.0
        self._second = 0
        self._bits = 0.0

    def _roll_to(self, t_s: int) -> None:
        while self._second < t_s:
            self.load_ema = 0.5 * (self.load_ema + self._bits)
            self._bits = 0.0
            self._second += 1

    def admit(self, t_us: int, bits: int) -> bool:
        if not self.enabled:
            return True
        self._roll_to(t_us // US)
        self._bits += bits
        p_pass = math.exp(-((self.load_ema / self.capacity_bps) ** self.collapse_k))
        return self.stream.random() < p_pass


class World:
    """Everything a protocol needs to run, plus the loop itself."""

    def __init__(
        self,
        cfg: SimConfig,
        log: MetricsLog,
        strict: bool = False,
        placement: str = "uniform",
    ) -> None:
        cfg = validate_config(cfg)
        self.cfg = cfg
        self.log = log
        self.strict = strict
        n = cfg.node_count
        self.bs_id = cfg.bs_id
        self.streams = RandomStreams(cfg.rng_seed)
        self.queue = EventQueue()
        self.radio = RadioModel(cfg.e_elec_j_per_bit, cfg.eps_amp_j_per_bit_m2)
        self.nodes = [NodeState(i) for i in range(n)]

        sensor_pos = place_nodes(
            n, cfg.field_width_m, cfg.field_height_m, self.streams.get("placement"), placement
        )
        self.positions = np.vstack([sensor_pos, np.asarray([cfg.bs_position])])
        self.mobility = MobilityField(
            self.positions[:n],
            self.streams.get("mobility"),
            cfg.field_width_m,
            cfg.field_height_m,
            cfg.mobility_speed_min_mps,
            cfg.mobility_speed_max_mps,
            cfg.mobility_pause_s,
        )
        self.dist = kernels.pairwise_distances(self.positions)

        self.ledger = EnergyLedger(n, cfg.initial_energy_j)
        self.ledger.on_death = self._on_death
        self.traffic = OnOffTraffic(
            n, cfg.traffic_on_s, cfg.traffic_off_s, cfg.traffic_rate_pps, cfg.rng_seed
        )
        self.channel = BsChannel(
            cfg.bs_mac_capacity_bps,
            cfg.bs_mac_collapse_k,
            self.streams.get("channel") if cfg.bs_mac_capacity_bps > 0 else None,
        )
        self.bs_trace: list[tuple[int, float, float | None]] = []

    # -- shared helpers ------------------------------------------------------

    def alive_in_range(self, center: int, radius: float) -> np.ndarray:
        """Alive sensor ids within radius of center (center excluded), ascending."""
        n = self.cfg.node_count
        mask = (self.dist[center, :n] <= radius) & self.ledger.alive
        if center < n:
            mask[center] = False
        return np.nonzero(mask)[0]

    def deliver_data(self, t_us: int, origin: int, reading: float, delta: float | None) -> None:
        """A data frame reached the sink's radio; the channel has final say."""
        if self.channel.admit(t_us, self.cfg.packet_size_bits):
            self.log.record_bs_rx(t_us / US)
            if self.strict:
                self.bs_trace.append((origin, reading, delta))
        else:
            self.log.dropped_congested += 1

    def _on_death(self, i: int) -> None:
        node = self.nodes[i]
        node.role = Role.DEAD
        node.cluster_of = None
        if node.pending:
            self.log.dropped_dead += len(node.pending)
            node.pending.clear()
        self.log.note_death(self.ledger.death_time_us[i] / US)

    # -- event loop ------------------------------------------------------------

    def run(self, protocol) -> None:
        cfg = self.cfg
        for t in range(cfg.sim_duration_s + 1):
            self.queue.schedule(t * US, EventKind.METRIC_SAMPLE, t)
        for t in range(1, cfg.sim_duration_s):
            self.queue.schedule(t * US, EventKind.MOBILITY_STEP, None)
        for t in range(cfg.sim_duration_s):
            self.queue.schedule(t * US, EventKind.TRAFFIC_GEN, t)
        self.queue.schedule(cfg.sim_us, EventKind.SIM_END, None)
        protocol.start()

        while True:
            t_us, kind, payload = self.queue.pop()
            if kind == EventKind.METRIC_SAMPLE:
                self.log.record_energy(
                    payload, self.ledger.total_consumed(), self.ledger.max_consumed()
                )
            elif kind == EventKind.MOBILITY_STEP:
                self.mobility.step(self.ledger.alive)
                self.dist = kernels.pairwise_distances(self.positions)
            elif kind == EventKind.TRAFFIC_GEN:
                for i in np.nonzero(self.ledger.alive)[0]:
                    readings = self.traffic.generate(int(i), payload)
                    if readings:
                        self.log.generated += len(readings)
                        protocol.on_readings(int(i), readings, t_us)
            elif kind == EventKind.SIM_END:
                protocol.finish(t_us)
                self.log.per_node_consumed = self.ledger.node_consumed()
                if self.strict:
                    self._check_final()
                break
            else:
                protocol.handle(kind, t_us, payload)

    # -- strict-mode invariants ------------------------------------------------

    def check_round(self, ctx) -> None:
        """Per-round structure: disjoint clusters, one unique slot per member."""
        seen: set[int] = set()
        for ch, members in ctx.clusters.items():
            slots = [ctx.tdma[i] for i in members if i in ctx.tdma]
            if len(set(slots)) != len(slots):
                raise InvariantViolation(f"duplicate TDMA slot in cluster of head {ch}")
            for i in members:
                if i in seen:
                    raise InvariantViolation(f"node {i} assigned to two clusters")
                seen.add(i)
                node = self.nodes[i]
                if node.cluster_of != ch and node.role == Role.CLUSTER_MEMBER:
                    raise InvariantViolation(f"node {i} membership mismatch")
        if ctx.ch_graph is not None:
            for u, v, w in ctx.ch_graph.edges():
                if w > self.cfg.radio_range_rr_m:
                    raise InvariantViolation(f"head graph edge {u}-{v} exceeds radio range")

    def check_routes(self, proto) -> None:
        """DSDV loop-freedom: every valid route walks to the sink, no revisits."""
        bs = self.bs_id
        for i in np.nonzero(self.ledger.alive)[0]:
            cur = int(i)
            visited = {cur}
            while True:
                if proto.seq[cur, bs] < 0 or proto.seq[cur, bs] % 2 == 1:
                    break
                if proto.metric[cur, bs] >= kernels.NO_ROUTE:
                    break
                nh = int(proto.next_hop[cur, bs])
                if nh < 0:
                    break
                if nh == bs:
                    break
                if nh in visited:
                    raise InvariantViolation(f"routing loop at node {cur} via {nh}")
                visited.add(nh)
                cur = nh

    def _check_final(self) -> None:
        if len(self.queue) != 0:
            raise InvariantViolation("events remain after the end of the run")
        residual = self.log.conservation_residual()
        if residual != 0:
            raise InvariantViolation(f"packet conservation broken: residual {residual}")
        ledger = self.ledger
        if not np.all(ledger.energy >= 0.0):
            raise InvariantViolation("negative residual energy")
        if not np.all(ledger.consumed >= 0.0):
            raise InvariantViolation("negative consumed energy")
        if not np.array_equal(ledger.alive, ledger.energy > 0.0):
            raise InvariantViolation("alive flags disagree with residual energy")
        drift = ledger.conservation_drift()
        if drift > 1e-9:
            raise InvariantViolation(f"energy ledger drift {drift} J exceeds 1e-9 J")
        for origin, reading, delta in self.bs_trace:
            if delta is not None and delta <= self.cfg.filter_threshold:
                raise InvariantViolation(
                    f"filtered-size change from node {origin} reached the sink"
                )


def run_simulation(
    cfg: SimConfig, protocol: str, strict: bool = False, placement: str = "uniform"
) -> MetricsLog:
    """Run one protocol over one scenario and return its metrics."""
    from .dsdv import DsdvProtocol
    from .mleach import MleachProtocol

    cfg = validate_config(cfg)
    log = MetricsLog(protocol, cfg.sim_duration_s, cfg.node_count)
    world = World(cfg, log, strict=strict, placement=placement)
    if protocol == "mleach":
        proto = MleachProtocol(world)
    elif protocol == "dsdv":
        proto = DsdvProtocol(world)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    world.run(proto)
    return log


def run_mleach(cfg: SimConfig, strict: bool = False) -> MetricsLog:
    return run_simulation(cfg, "mleach", strict=strict)


def run_dsdv(cfg: SimConfig, strict: bool = False) -> MetricsLog:
    return run_simulation(cfg, "dsdv", strict=strict)
