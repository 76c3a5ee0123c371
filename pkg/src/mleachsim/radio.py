"""First-order radio energy model and the energy ledger.

Transmitting k bits over distance d costs E_elec*k + eps_amp*k*d^2; receiving
costs E_elec*k. Every charge in either protocol goes through EnergyLedger so
totals, clamping, and death bookkeeping live in one place. The base station
is infrastructure: it is never charged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .mobility import distance


@dataclass(frozen=True)
class RadioModel:
    e_elec_j_per_bit: float = 50e-9
    eps_amp_j_per_bit_m2: float = 120e-12

    def tx_energy(self, k: int, d: float) -> float:
        """Energy to transmit k bits over d meters."""
        if k < 0:
            raise ValueError("bit count must not be negative")
        if d < 0:
            raise ValueError("distance must not be negative")
        return self.e_elec_j_per_bit * k + self.eps_amp_j_per_bit_m2 * k * (d * d)

    def rx_energy(self, k: int) -> float:
        """Energy to receive k bits."""
        if k < 0:
            raise ValueError("bit count must not be negative")
        return self.e_elec_j_per_bit * k


def in_range(a: tuple[float, float], b: tuple[float, float], r: float) -> bool:
    """Inclusive range check: boundary distance still counts as reachable."""
    if r <= 0:
        raise ValueError("range must be positive")
    return distance(a, b) <= r


class EnergyLedger:
    """Residual and consumed energy per node, with clamped charging.

    A node whose residual cannot cover a charge burns what remains, hits
    zero, and the action fails; a node that pays exactly its residual
    succeeds and then dies. Death callbacks fire once per node, in the
    order deaths occur.

    Totals are compensated: the grand total is a Kahan-summed scalar fed by
    every charge, and per-node subtotals carry Neumaier correction terms,
    so reported consumption stays within ~1 ulp of the true sum of charges
    even after millions of them. The two are computed independently, which
    lets conservation be checked rather than assumed.
    """

    def __init__(self, node_count: int, initial_j: float) -> None:
        self.initial_j = initial_j
        self.energy = np.full(node_count, float(initial_j))
        self.consumed = np.zeros(node_count)
        self.consumed_comp = np.zeros(node_count)
        self.alive = np.ones(node_count, dtype=bool)
        self.death_time_us = np.full(node_count, -1, dtype=np.int64)
        self.on_death = None  # callable(node_id) or None
        self._total = 0.0
        self._total_comp = 0.0

    def _total_add(self, x: float) -> None:
        y = x - self._total_comp
        t = self._total + y
        self._total_comp = (t - self._total) - y
        self._total = t

    def _node_add(self, i: int, x: float) -> None:
        s = self.consumed[i]
        t = s + x
        if s >= x:
            self.consumed_comp[i] += (s - t) + x
        else:
            self.consumed_comp[i] += (x - t) + s
        self.consumed[i] = t

    def _mark_dead(self, i: int, now_us: int) -> None:
        if not self.alive[i]:
            return
        self.alive[i] = False
        self.death_time_us[i] = now_us
        if self.on_death is not None:
            self.on_death(i)

    def consume(self, i: int, j: float, now_us: int) -> bool:
        """Charge node i. Returns True iff the paid-for action succeeds."""
        if j < 0:
            raise ValueError("charge must not be negative")
        e = self.energy[i]
        if e >= j:
            self.energy[i] = e - j
            self._node_add(i, j)
            self._total_add(j)
            if self.energy[i] == 0.0:
                self._mark_dead(i, now_us)
            return True
        self.energy[i] = 0.0
        self._node_add(i, float(e))
        self._total_add(float(e))
        self._mark_dead(i, now_us)
        return False

    def charge_many(self, ids: np.ndarray, amount: float, now_us: int) -> np.ndarray:
        """Charge every node in ids (sorted, alive). Returns success mask."""
        if len(ids) == 0:
            return np.zeros(0, dtype=bool)
        residual_before = self.energy[ids].copy()
        ok, died = kernels.charge_uniform(
            self.energy, self.consumed, self.consumed_comp, ids, amount
        )
        self._total_add(amount * int(np.count_nonzero(ok)))
        if not ok.all():
            self._total_add(math.fsum(residual_before[~ok]))
        for i in died:
            self._mark_dead(int(i), now_us)
        return ok

    def node_consumed(self) -> np.ndarray:
        """Per-node consumed energy with the correction terms folded in."""
        return self.consumed + self.consumed_comp

    def total_consumed(self) -> float:
        return self._total

    def max_consumed(self) -> float:
        return float(np.max(self.consumed + self.consumed_comp))

    def conservation_drift(self) -> float:
        """|running total - exact sum of per-node subtotals|.

        The running total is Kahan-accumulated per charge; the reference
        side sums the unfolded per-node parts exactly with fsum. The two
        paths share no arithmetic, so agreement bounds the bookkeeping
        error of both.
        """
        exact = math.fsum(self.consumed.tolist() + self.consumed_comp.tolist())
        return abs(self._total - exact)
