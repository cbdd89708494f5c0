"""Interval-binned link travel-time/flow statistics and the marginal-cost surrogate.

Link costs are aggregated per (link, time bin) from the previous loading.
The marginal travel time of a link is approximated by a finite-difference
surrogate over the last two iterations' (cost, flow) pairs; degenerate
slopes fall back to the plain experienced cost.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .errors import DataError, ParameterError, UnknownIdError
from .network import Network, free_flow_time

DEFAULT_INTERVAL_S = 900.0
DEFAULT_CAP_MULT = 10.0


class CostTable:
    """Per (link, bin) mean travel time and flow count; bins are [k*z, (k+1)*z)."""

    def __init__(self, interval_s: float = DEFAULT_INTERVAL_S):
        if interval_s <= 0:
            raise ParameterError("interval_s must be > 0")
        self.interval_s = interval_s
        self.cells: dict[tuple[str, int], tuple[float, int]] = {}

    def bin_of(self, t: float) -> int:
        return int(t // self.interval_s)

    def set_cell(self, link_id: str, b: int, mean_tt_s: float, flow: int) -> None:
        self.cells[(link_id, b)] = (mean_tt_s, flow)

    def get(self, link_id: str, t: float):
        """(mean_tt_s, flow) for the bin containing t, or None if unpopulated."""
        return self.cells.get((link_id, self.bin_of(t)))

    def total_flow(self, link_id: str) -> int:
        return sum(f for (lid, _), (_, f) in self.cells.items() if lid == link_id)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["link_id", "bin_index", "mean_tt_s", "flow"])
            for (lid, b) in sorted(self.cells):
                mean, flow = self.cells[(lid, b)]
                w.writerow([lid, b, mean, flow])


@dataclass
class CostHistory:
    """Cost tables of the two preceding iterations plus free-flow fallbacks."""

    free_flow: dict[str, float]
    interval_s: float = DEFAULT_INTERVAL_S
    prev: CostTable | None = None
    prev2: CostTable | None = None

    @classmethod
    def cold_start(cls, network: Network, interval_s: float = DEFAULT_INTERVAL_S):
        ff = {lid: free_flow_time(lk) for lid, lk in network.links.items()}
        return cls(free_flow=ff, interval_s=interval_s)

    def shifted(self, new_table: CostTable) -> "CostHistory":
        return CostHistory(
            free_flow=self.free_flow,
            interval_s=self.interval_s,
            prev=new_table,
            prev2=self.prev,
        )

    def _ff(self, link_id: str) -> float:
        try:
            return self.free_flow[link_id]
        except KeyError:
            raise UnknownIdError(f"unknown link id {link_id}") from None


def aggregate_costs(trip_records, network: Network, interval_s: float) -> CostTable:
    """Bin per-link travel times by link-entry time and average them."""
    sums: dict[tuple[str, int], float] = {}
    counts: dict[tuple[str, int], int] = {}
    table = CostTable(interval_s)
    for rec in trip_records:
        for link_id, entry, exit_ in rec.link_times:
            if exit_ is None:
                continue  # still on the link at horizon: no observation
            if exit_ < entry:
                raise DataError(
                    f"vehicle {rec.vehicle_id} link {link_id}: exit {exit_} < entry {entry}"
                )
            key = (link_id, table.bin_of(entry))
            sums[key] = sums.get(key, 0.0) + (exit_ - entry)
            counts[key] = counts.get(key, 0) + 1
    for key, total in sums.items():
        table.cells[key] = (total / counts[key], counts[key])
    return table


def link_cost(history: CostHistory, link_id: str, t: float) -> float:
    """Experienced cost from the previous iteration; free-flow if unobserved."""
    ff = history._ff(link_id)
    if history.prev is not None:
        cell = history.prev.get(link_id, t)
        if cell is not None:
            return cell[0]
    return ff


def marginal_link_cost(
    history: CostHistory,
    link_id: str,
    t: float,
    cap_mult: float = DEFAULT_CAP_MULT,
) -> float:
    """Finite-difference marginal travel time surrogate.

    c1 + f1 * (c1-c2)/(f1-f2), clamped: negative slopes go to zero and the
    total is capped at cap_mult*c1 against finite-difference noise.  Any
    missing history or flat flow falls back to the experienced cost.
    """
    ff = history._ff(link_id)
    if history.prev is None or history.prev2 is None:
        return link_cost(history, link_id, t)
    cell1 = history.prev.get(link_id, t)
    cell2 = history.prev2.get(link_id, t)
    if cell1 is None or cell2 is None:
        return link_cost(history, link_id, t)
    c1, f1 = cell1
    c2, f2 = cell2
    if f1 == f2:
        return c1
    slope = max(0.0, (c1 - c2) / (f1 - f2))
    return min(c1 + f1 * slope, cap_mult * c1)
