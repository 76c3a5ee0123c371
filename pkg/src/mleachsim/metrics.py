"""Run measurement: time series, counters, throughput statistics, CSV export.

CSV output is deterministic byte-for-byte for a fixed run: floats are
rendered with repr (shortest round-trip form), rows come from ordered
series, and files end with LF line endings.
"""

from __future__ import annotations

import csv
import math
import os

import numpy as np


class MetricsLog:
    def __init__(self, protocol: str, duration_s: int, node_count: int) -> None:
        self.protocol = protocol
        self.duration_s = duration_s
        self.node_count = node_count
        self.energy_series: list[tuple[int, float, float]] = []  # (t, total, max node)
        self.bs_buckets = np.zeros(duration_s, dtype=np.int64)
        self.alive_series: list[tuple[int, int]] = []
        self.ch_count_series: list[tuple[int, int]] = []
        self.generated = 0
        self.delivered = 0
        self.dropped_filtered = 0
        self.dropped_unreachable = 0
        self.dropped_dead = 0
        self.dropped_congested = 0
        self.first_death_s: float = -1.0
        self.per_node_consumed: np.ndarray | None = None

    # -- recording ---------------------------------------------------------

    def record_energy(self, t_s: int, total_j: float, max_j: float) -> None:
        self.energy_series.append((t_s, total_j, max_j))

    def record_bs_rx(self, t_s: float) -> None:
        bucket = math.floor(t_s)
        if not 0 <= bucket < self.duration_s:
            raise ValueError(f"delivery at t={t_s} outside the run")
        self.bs_buckets[bucket] += 1
        self.delivered += 1

    def note_death(self, t_s: float) -> None:
        if self.first_death_s < 0:
            self.first_death_s = t_s

    # -- statistics ----------------------------------------------------------

    def steady_state_throughput(self, t_start_s: int) -> float:
        window = self.bs_buckets[t_start_s:]
        if len(window) == 0:
            raise ValueError("empty throughput window")
        return float(np.mean(window))

    def default_warmup_s(self) -> int:
        return 20 if self.duration_s > 20 else 0

    def energy_fit_r2(self, t_start_s: int, t_end_s: int) -> float:
        """R-squared of a least-squares line through total energy vs time."""
        pts = [(t, total) for t, total, _ in self.energy_series if t_start_s <= t <= t_end_s]
        if len(pts) < 3:
            raise ValueError("not enough samples for a fit")
        t = np.array([p[0] for p in pts], dtype=float)
        y = np.array([p[1] for p in pts], dtype=float)
        slope, intercept = np.polyfit(t, y, 1)
        resid = y - (slope * t + intercept)
        ss_res = float(np.sum(resid * resid))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        if ss_tot == 0.0:
            return 1.0
        return 1.0 - ss_res / ss_tot

    def conservation_residual(self) -> int:
        drops = (
            self.dropped_filtered
            + self.dropped_unreachable
            + self.dropped_dead
            + self.dropped_congested
        )
        return self.generated - (self.delivered + drops)

    def avg_consumed(self) -> float:
        if not self.energy_series:
            return 0.0
        return self.energy_series[-1][1] / self.node_count

    def max_consumed(self) -> float:
        if not self.energy_series:
            return 0.0
        return self.energy_series[-1][2]

    # -- export --------------------------------------------------------------

    def export_csv(self, out_dir: str) -> None:
        """Write energy.csv, throughput.csv and summary.csv into out_dir."""
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "energy.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_s", "total_j", "max_node_j"])
            for t, total, mx in self.energy_series:
                w.writerow([t, repr(total), repr(mx)])
        with open(
            os.path.join(out_dir, "throughput.csv"), "w", newline="", encoding="utf-8"
        ) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_s", "packets"])
            for t in range(self.duration_s):
                w.writerow([t, int(self.bs_buckets[t])])
        with open(os.path.join(out_dir, "summary.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_FIELDS)
            w.writerow(self.summary_row())

    def summary_row(self) -> list:
        return [
            self.protocol,
            repr(self.avg_consumed()),
            repr(self.max_consumed()),
            repr(self.steady_state_throughput(self.default_warmup_s())),
            repr(self.first_death_s),
            self.generated,
            self.delivered,
            self.dropped_filtered,
            self.dropped_unreachable,
            self.dropped_dead,
            self.dropped_congested,
        ]


SUMMARY_FIELDS = [
    "protocol",
    "avg_energy_j",
    "max_energy_j",
    "steady_throughput_pps",
    "first_death_s",
    "generated",
    "delivered",
    "dropped_filtered",
    "dropped_unreachable",
    "dropped_dead",
    "dropped_congested",
]
