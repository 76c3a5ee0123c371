"""Round-based clustering protocol with multi-hop head-to-sink routing.

Each round: probabilistic head election with an exclusion window, hello
broadcasts to form clusters, id-ordered TDMA slots for member uplink,
change-filtering at the heads, and shortest-path forwarding over the graph
of heads plus the base station. Members transmit all queued readings in
their slot; heads flush their own readings when the round closes. Orphans
(no head within the cluster radius) send straight to the base station when
it is in radio range.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import EventKind
from .model import ChGraph, Role


def ch_threshold(p: float, r: int, in_g: bool) -> float:
    """Election probability for round r.

    Rises over an epoch of ceil(1/p) rounds as the eligible set shrinks,
    reaching 1.0 in the final round so every remaining eligible node is
    elected. Nodes outside the eligible set get 0. The raw formula can
    exceed 1 by a few ulps at the epoch's last round, so the result is
    clamped into (0, 1].
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    if r < 0:
        raise ValueError("round index must not be negative")
    if not in_g:
        return 0.0
    epoch = math.ceil(1.0 / p)
    return min(1.0, p / (1.0 - p * (r % epoch)))


def run_election(
    nodes: list,
    alive_ids,
    r: int,
    p: float,
    exclusion_rounds: int,
    epoch_rounds: int,
    stream,
) -> set[int]:
    """One round of head election with exclusion bookkeeping.

    Eligibility resets at every epoch boundary (the exclusion window is
    "this epoch", not a rolling count), eligible nodes draw in id order,
    and a round that elects nobody promotes the smallest-id candidate so
    there is never a headless round. Elected nodes leave the eligible set;
    everyone else's exclusion counter decays.
    """
    if r % epoch_rounds == 0:
        for i in alive_ids:
            nodes[i].exclusion_remaining = 0
    elected: set[int] = set()
    for i in alive_ids:
        if nodes[i].in_g and stream.random() < ch_threshold(p, r, True):
            elected.add(int(i))
    if not elected:
        pool = [int(i) for i in alive_ids if nodes[i].in_g] or [int(i) for i in alive_ids]
        elected.add(min(pool))
    for i in alive_ids:
        if int(i) in elected:
            nodes[i].exclusion_remaining = exclusion_rounds
        elif nodes[i].exclusion_remaining > 0:
            nodes[i].exclusion_remaining -= 1
    return elected


def build_ch_graph(dist: np.ndarray, chs: list[int], bs_id: int, rr: float) -> ChGraph:
    """Graph over the given heads plus the base station; edges within rr."""
    graph = ChGraph(list(chs) + [bs_id])
    verts = graph.vertices
    for a in range(len(verts)):
        for b in range(a + 1, len(verts)):
            w = float(dist[verts[a], verts[b]])
            if w <= rr:
                graph.add_edge(verts[a], verts[b], w)
    graph.sort_adjacency()
    return graph


def shortest_route(graph: ChGraph, src: int, bs_id: int) -> list[int] | None:
    """Minimum-weight path src -> base station, or None if unreachable.

    Ties break on fewer hops, then on the lexicographically smallest vertex
    sequence. Implemented as Dijkstra keyed on (cost, hops, path): the first
    settled path per vertex is minimal under that order, and extending a
    path never reorders prefixes, so the first pop of the target is optimal.
    """
    if src not in graph.adj:
        return None
    heap: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (src,))]
    done: set[int] = set()
    while heap:
        cost, hops, path = heapq.heappop(heap)
        v = path[-1]
        if v in done:
            continue
        done.add(v)
        if v == bs_id:
            return list(path)
        for nbr, w in graph.adj[v]:
            if nbr not in done:
                heapq.heappush(heap, (cost + w, hops + 1, path + (nbr,)))
    return None


def path_cost(graph: ChGraph, path: list[int]) -> float:
    total = 0.0
    for u, v in zip(path, path[1:]):
        w = next(w for n, w in graph.adj[u] if n == v)
        total += w
    return total


@dataclass
class RoundContext:
    r: int
    cluster_heads: list[int] = field(default_factory=list)
    clusters: dict[int, list[int]] = field(default_factory=dict)
    tdma: dict[int, int] = field(default_factory=dict)
    ch_graph: ChGraph | None = None
    routes: dict[int, list[int] | None] = field(default_factory=dict)


class MleachProtocol:
    def __init__(self, world) -> None:
        self.world = world
        self.cfg = world.cfg
        self.ctx: RoundContext | None = None

    # -- scheduling ----------------------------------------------------------

    def start(self) -> None:
        cfg = self.cfg
        for r in range(cfg.sim_us // cfg.round_us):
            self.world.queue.schedule(r * cfg.round_us, EventKind.ROUND_START, r)

    def on_readings(self, i: int, readings: list[float], t_us: int) -> None:
        self.world.nodes[i].pending.extend(readings)

    def handle(self, kind: EventKind, t_us: int, payload) -> None:
        if kind == EventKind.ROUND_START:
            self._round_start(t_us, payload)
        elif kind == EventKind.SLOT_START:
            self._slot(t_us, *payload)
        elif kind == EventKind.ORPHAN_FLUSH:
            self._orphan_flush(t_us, payload)
        elif kind == EventKind.ROUND_FINISH:
            self._round_finish(t_us)

    def finish(self, t_us: int) -> None:
        # readings still queued when the run ends never found a path out
        for node in self.world.nodes:
            if node.pending:
                self.world.log.dropped_unreachable += len(node.pending)
                node.pending.clear()

    # -- round phases ----------------------------------------------------------

    def _round_start(self, t_us: int, r: int) -> None:
        world = self.world
        cfg = self.cfg
        ledger = world.ledger
        radio = world.radio
        self.ctx = ctx = RoundContext(r)

        alive = np.nonzero(ledger.alive)[0]
        if len(alive) == 0:
            world.log.alive_series.append((r, 0))
            world.log.ch_count_series.append((r, 0))
            return

        elected = run_election(
            world.nodes,
            alive,
            r,
            cfg.p_ch_fraction,
            cfg.ch_exclusion_rounds,
            cfg.epoch_rounds,
            world.streams.get("election"),
        )
        for i in alive:
            node = world.nodes[i]
            node.role = Role.CLUSTER_HEAD if int(i) in elected else Role.IDLE
            node.cluster_of = None

        # formation hellos; a head that cannot pay the broadcast is silent
        hello_tx = radio.tx_energy(cfg.hello_bits, cfg.cluster_radius_rc_m)
        hello_rx = radio.rx_energy(cfg.hello_bits)
        heard_from: list[int] = []
        for ch in sorted(elected):
            if not ledger.consume(ch, hello_tx, t_us):
                continue
            world.ledger.charge_many(world.alive_in_range(ch, cfg.cluster_radius_rc_m), hello_rx, t_us)
            heard_from.append(ch)
        chs = [ch for ch in heard_from if ledger.alive[ch]]
        ctx.cluster_heads = chs

        self._assign_members(ctx, chs)
        orphans = self._build_tdma(ctx, t_us)
        orphans.extend(
            i for i in np.nonzero(ledger.alive)[0] if world.nodes[i].role == Role.ORPHAN_DIRECT
        )
        self._build_graph_and_routes(ctx, t_us)

        round_start_us = r * cfg.round_us
        for rank, i in enumerate(sorted(set(orphans))):
            offset = (rank + 1) * cfg.round_us // (len(orphans) + 1)
            world.queue.schedule(round_start_us + offset, EventKind.ORPHAN_FLUSH, int(i))
        world.queue.schedule(round_start_us + cfg.round_us - 1, EventKind.ROUND_FINISH, r)

        world.log.alive_series.append((r, int(np.count_nonzero(ledger.alive))))
        world.log.ch_count_series.append((r, len(ctx.cluster_heads)))

    def _assign_members(self, ctx: RoundContext, chs: list[int]) -> None:
        world = self.world
        ledger = world.ledger
        rc = self.cfg.cluster_radius_rc_m
        ctx.clusters = {ch: [] for ch in chs}
        free = np.array(
            [i for i in np.nonzero(ledger.alive)[0] if world.nodes[i].role == Role.IDLE],
            dtype=np.int64,
        )
        if len(free) == 0:
            return
        if chs:
            sub = world.dist[np.ix_(free, np.array(chs, dtype=np.int64))]
            nearest = np.argmin(sub, axis=1)  # first minimum: smallest head id wins ties
            near_d = sub[np.arange(len(free)), nearest]
        for k, i in enumerate(free):
            node = world.nodes[i]
            if chs and near_d[k] <= rc:
                ch = chs[nearest[k]]
                node.role = Role.CLUSTER_MEMBER
                node.cluster_of = ch
                ctx.clusters[ch].append(int(i))
            else:
                node.role = Role.ORPHAN_DIRECT

    def _build_tdma(self, ctx: RoundContext, t_us: int) -> list[int]:
        """Assign id-ordered slots and broadcast each cluster's schedule.

        Returns members stranded by a head that died announcing its
        schedule; they fall back to direct-to-sink for this round.
        """
        world = self.world
        cfg = self.cfg
        stranded: list[int] = []
        round_start_us = ctx.r * cfg.round_us
        for ch in ctx.cluster_heads:
            members = sorted(ctx.clusters[ch])
            ctx.clusters[ch] = members
            m = len(members)
            if m == 0:
                continue
            bits = cfg.schedule_bits_per_cm * m
            if not world.ledger.consume(ch, world.radio.tx_energy(bits, cfg.cluster_radius_rc_m), t_us):
                ctx.clusters[ch] = []
                for i in members:
                    world.nodes[i].role = Role.ORPHAN_DIRECT
                    world.nodes[i].cluster_of = None
                    stranded.append(i)
                continue
            world.ledger.charge_many(
                world.alive_in_range(ch, cfg.cluster_radius_rc_m),
                world.radio.rx_energy(bits),
                t_us,
            )
            slot_us = cfg.round_us // m
            for slot, i in enumerate(members):
                if not world.ledger.alive[i]:
                    continue
                ctx.tdma[i] = slot
                world.queue.schedule(
                    round_start_us + slot * slot_us, EventKind.SLOT_START, (i, ch)
                )
        return stranded

    def _build_graph_and_routes(self, ctx: RoundContext, t_us: int) -> None:
        world = self.world
        cfg = self.cfg
        hello_tx = world.radio.tx_energy(cfg.hello_bits, cfg.radio_range_rr_m)
        hello_rx = world.radio.rx_energy(cfg.hello_bits)
        verts = []
        for ch in ctx.cluster_heads:
            if not world.ledger.alive[ch]:
                continue
            if not world.ledger.consume(ch, hello_tx, t_us):
                continue
            world.ledger.charge_many(
                world.alive_in_range(ch, cfg.radio_range_rr_m), hello_rx, t_us
            )
            verts.append(ch)
        verts = [ch for ch in verts if world.ledger.alive[ch]]
        ctx.ch_graph = build_ch_graph(world.dist, verts, world.bs_id, cfg.radio_range_rr_m)
        for ch in verts:
            ctx.routes[ch] = shortest_route(ctx.ch_graph, ch, world.bs_id)

    # -- data plane ----------------------------------------------------------

    def _slot(self, t_us: int, cm: int, ch: int) -> None:
        world = self.world
        cfg = self.cfg
        node = world.nodes[cm]
        if not world.ledger.alive[cm] or node.cluster_of != ch:
            return
        d = float(world.dist[cm, ch])
        if not node.pending:
            if world.ledger.consume(cm, world.radio.tx_energy(cfg.heartbeat_bits, d), t_us):
                if world.ledger.alive[ch]:
                    world.ledger.consume(ch, world.radio.rx_energy(cfg.heartbeat_bits), t_us)
            return
        todo = node.pending
        node.pending = []
        tx = world.radio.tx_energy(cfg.packet_size_bits, d)
        rx = world.radio.rx_energy(cfg.packet_size_bits)
        for idx, reading in enumerate(todo):
            if not world.ledger.consume(cm, tx, t_us):
                world.log.dropped_dead += len(todo) - idx
                return
            if not world.ledger.alive[ch] or not world.ledger.consume(ch, rx, t_us):
                world.log.dropped_dead += 1
                continue
            self._head_accept(t_us, ch, cm, reading)

    def _head_accept(self, t_us: int, ch: int, origin: int, reading: float) -> None:
        """Change filter: forward only readings that moved beyond the threshold."""
        node = self.world.nodes[origin]
        delta = abs(reading - node.last_forwarded_reading)
        if delta > self.cfg.filter_threshold:
            node.last_forwarded_reading = reading
            self._route(t_us, ch, origin, reading, delta)
        else:
            self.world.log.dropped_filtered += 1

    def _route(self, t_us: int, ch: int, origin: int, reading: float, delta: float) -> None:
        world = self.world
        cfg = self.cfg
        path = self.ctx.routes.get(ch) if self.ctx else None
        if path is None:
            world.log.dropped_unreachable += 1
            return
        for u, v in zip(path, path[1:]):
            if not world.ledger.alive[u]:
                world.log.dropped_dead += 1
                return
            tx = world.radio.tx_energy(cfg.packet_size_bits, float(world.dist[u, v]))
            if not world.ledger.consume(u, tx, t_us):
                world.log.dropped_dead += 1
                return
            if v == world.bs_id:
                world.deliver_data(t_us, origin, reading, delta)
                return
            if not world.ledger.consume(v, world.radio.rx_energy(cfg.packet_size_bits), t_us):
                world.log.dropped_dead += 1
                return

    def _orphan_flush(self, t_us: int, i: int) -> None:
        world = self.world
        cfg = self.cfg
        node = world.nodes[i]
        if not world.ledger.alive[i] or node.role != Role.ORPHAN_DIRECT or not node.pending:
            return
        todo = node.pending
        node.pending = []
        d = float(world.dist[i, world.bs_id])
        if d > cfg.radio_range_rr_m:
            world.log.dropped_unreachable += len(todo)
            return
        tx = world.radio.tx_energy(cfg.packet_size_bits, d)
        for idx, reading in enumerate(todo):
            delta = abs(reading - node.last_forwarded_reading)
            if delta <= cfg.filter_threshold:
                world.log.dropped_filtered += 1
                continue
            node.last_forwarded_reading = reading
            if not world.ledger.consume(i, tx, t_us):
                world.log.dropped_dead += len(todo) - idx
                return
            world.deliver_data(t_us, i, reading, delta)

    def _round_finish(self, t_us: int) -> None:
        ctx = self.ctx
        if ctx is None:
            return
        world = self.world
        for ch in ctx.routes:
            node = world.nodes[ch]
            if not world.ledger.alive[ch] or not node.pending:
                continue
            todo = node.pending
            node.pending = []
            for reading in todo:
                self._head_accept(t_us, ch, ch, reading)
        if world.strict:
            world.check_round(ctx)
