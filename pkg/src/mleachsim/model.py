"""Shared domain types: node state, packets, the cluster-head graph, placement.

Node ids are 0..node_count-1. The base station is not a node: it is addressed
by the sentinel id ``node_count`` (one past the last node) so that position
arrays can carry it as their final row. Broadcast destinations use -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

BROADCAST = -1


class Role(IntEnum):
    """What a node is currently doing for the active protocol."""

    IDLE = 0  # not yet assigned this round (or protocol has no roles)
    CLUSTER_HEAD = 1
    CLUSTER_MEMBER = 2
    ORPHAN_DIRECT = 3  # no head in reach; sends straight to the sink when it can
    DEAD = 4


class PacketKind(IntEnum):
    DATA = 0
    HELLO = 1
    SCHEDULE = 2
    HEARTBEAT = 3
    ROUTE_UPDATE = 4


@dataclass(slots=True)
class Packet:
    """A single frame. Data packets carry the reading and its origin node."""

    kind: PacketKind
    src: int
    dst: int
    size_bits: int
    created_at_s: float
    reading: float = 0.0
    origin: int = -1

    def __post_init__(self) -> None:
        if self.size_bits <= 0:
            raise ValueError("size_bits must be positive")
        if self.kind == PacketKind.DATA and not math.isfinite(self.reading):
            raise ValueError("data packet reading must be finite")


@dataclass(slots=True)
class NodeState:
    """Per-node protocol state.

    Positions and residual energies live in arrays owned by the world/ledger;
    this object keeps the protocol-facing scalars. ``last_forwarded_reading``
    starts at -inf so a node's first reading always clears the change filter.
    """

    id: int
    role: Role = Role.IDLE
    cluster_of: int | None = None
    exclusion_remaining: int = 0
    reading: float = 0.0
    last_forwarded_reading: float = float("-inf")
    pending: list[float] = field(default_factory=list)

    @property
    def in_g(self) -> bool:
        """Eligible for election: not excluded by a recent head term."""
        return self.exclusion_remaining == 0


class ChGraph:
    """Undirected graph over alive cluster heads plus the base station.

    Edges connect vertices within radio range; weights are distances in
    meters. Adjacency lists are kept sorted by neighbor id so traversal
    order is deterministic.
    """

    def __init__(self, vertices: list[int]) -> None:
        self.vertices = sorted(vertices)
        self.adj: dict[int, list[tuple[int, float]]] = {v: [] for v in self.vertices}

    def add_edge(self, u: int, v: int, w: float) -> None:
        if u == v:
            raise ValueError("self-loops not allowed")
        self.adj[u].append((v, w))
        self.adj[v].append((u, w))

    def sort_adjacency(self) -> None:
        for lst in self.adj.values():
            lst.sort()

    def edges(self) -> list[tuple[int, int, float]]:
        out = []
        for u in self.vertices:
            for v, w in self.adj[u]:
                if u < v:
                    out.append((u, v, w))
        return out


def place_nodes(
    n: int,
    width: float,
    height: float,
    stream: np.random.Generator,
    mode: str = "uniform",
) -> np.ndarray:
    """Draw initial node positions inside the field.

    ``uniform`` scatters independently. ``clustered`` approximates debris
    carried into pools: a handful of sites, Gaussian spread around each,
    clipped to the field.
    """
    if mode == "uniform":
        pos = stream.random((n, 2))
        pos[:, 0] *= width
        pos[:, 1] *= height
        return pos
    if mode == "clustered":
        k = max(2, n // 100)
        sites = stream.random((k, 2)) * (width, height)
        spread = min(width, height) / 20.0
        offsets = stream.normal(0.0, spread, size=(n, 2))
        pos = sites[np.arange(n) % k] + offsets
        np.clip(pos[:, 0], 0.0, width, out=pos[:, 0])
        np.clip(pos[:, 1], 0.0, height, out=pos[:, 1])
        return pos
    raise ValueError(f"unknown placement mode: {mode!r}")
