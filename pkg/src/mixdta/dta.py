"""Iterative assignment loop: route, choose, swap, load, aggregate, gap.

Each iteration computes a fresh class-specific shortest path per vehicle
(experienced costs for UE-seeking HDVs, marginal costs for SO-seeking CAVs),
merges it into the vehicle's alternative path set, logit-selects a proposal,
retains the previous final path with the PSwap probability, loads the final
paths through the queue simulator, and evaluates the hybrid gap.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field

from .choice import ChoiceConfig, pswap, select_path
from .costs import CostHistory, marginal_link_cost
from .demand import ClassConfig, Demand, VehicleClass
from .errors import MixDtaError
from .mesosim import LoaderConfig, TripRecord, run_loading
from .network import Network
from .routing import PathSet, shortest_path_td, update_path_set


@dataclass
class DtaConfig:
    loader: LoaderConfig
    choice: ChoiceConfig = field(default_factory=ChoiceConfig)
    max_iterations: int = 50
    epsilon_s: float = 5.0
    plateau_window: int = 3
    plateau_rel_change: float = 0.02
    k_max: int = 4
    interval_s: float = 900.0
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise MixDtaError("max_iterations must be >= 1")
        if self.epsilon_s <= 0:
            raise MixDtaError("epsilon_s must be > 0")
        if not 0 < self.plateau_rel_change < 1:
            raise MixDtaError("plateau_rel_change must be in (0,1)")


@dataclass
class IterationReport:
    iteration: int
    gap1_s: float
    gap2_s: float
    hybrid_gap_s: float
    total_travel_time_h: float
    avg_speed_kmh: float
    avg_distance_km: float
    unfinished_count: int


@dataclass
class AssignmentResult:
    reports: list[IterationReport]
    records: list[TripRecord]
    stop_reason: str  # "epsilon" | "plateau" | "max_iterations"


def compute_gap1(hdv_records) -> float:
    """Mean over OD pairs of (mean - min) experienced HDV travel time."""
    by_od: dict[tuple[str, str], list[float]] = {}
    for rec in hdv_records:
        tt = rec.arrive_s - rec.depart_s
        by_od.setdefault(_od(rec), []).append(tt)
    if not by_od:
        return 0.0
    terms = [sum(tts) / len(tts) - min(tts) for tts in by_od.values()]
    return sum(terms) / len(terms)


def compute_gap2(cav_records, history: CostHistory) -> float:
    """Mean over OD pairs of (mean - min) experienced marginal CAV travel time.

    The experienced marginal time of a vehicle is the sum of marginal link
    costs evaluated at its recorded link-entry times, against the cost
    history holding this iteration's aggregation.
    """
    by_od: dict[tuple[str, str], list[float]] = {}
    for rec in cav_records:
        mtt = sum(
            marginal_link_cost(history, lid, entry)
            for lid, entry, exit_ in rec.link_times
            if exit_ is not None
        )
        by_od.setdefault(_od(rec), []).append(mtt)
    if not by_od:
        return 0.0
    terms = [sum(ts) / len(ts) - min(ts) for ts in by_od.values()]
    return sum(terms) / len(terms)


def hybrid_gap(gap1_s: float, gap2_s: float) -> float:
    return (gap1_s + gap2_s) / 2


def compute_metrics(trip_records) -> tuple[float, float, float]:
    """(total travel time in hours, average speed km/h, average distance km)."""
    if not trip_records:
        return 0.0, 0.0, 0.0
    ttt_h = sum(r.arrive_s - r.depart_s for r in trip_records) / 3600.0
    dist_km = sum(r.distance_m for r in trip_records) / 1000.0
    avg_dist = dist_km / len(trip_records)
    avg_speed = dist_km / ttt_h if ttt_h > 0 else 0.0
    return ttt_h, avg_speed, avg_dist


def _od(rec) -> tuple[str, str]:
    return (rec.origin, rec.destination)


def run_assignment(
    network: Network,
    demand: Demand,
    class_configs: dict[VehicleClass, ClassConfig],
    config: DtaConfig,
) -> AssignmentResult:
    """Run the assignment loop until the hybrid gap converges."""
    kind_of = {
        vc: ("marginal" if cc.routing_principle == "SO" else "experienced")
        for vc, cc in class_configs.items()
    }
    history = CostHistory.cold_start(network, config.interval_s)
    vehicles = demand.vehicles
    path_sets: dict[int, PathSet] = {
        v.id: PathSet(v.origin, v.destination) for v in vehicles
    }
    finals = {}
    rngs = {v.id: random.Random(f"{config.seed}:veh:{v.id}") for v in vehicles}

    reports: list[IterationReport] = []
    stop_reason = "max_iterations"

    for i in range(config.max_iterations + 1):
        try:
            for v in vehicles:
                kind = kind_of[v.vclass]
                sp = shortest_path_td(
                    network, history, v.origin, v.destination, v.depart_s, kind
                )
                ps = update_path_set(
                    path_sets[v.id], sp, history, v.depart_s, kind, config.k_max
                )
                if i == 0:
                    # cold start: free-flow shortest path, no choice stage
                    finals[v.id] = sp
                    continue
                proposal = select_path(
                    ps, history, v.depart_s, kind, config.choice, rngs[v.id]
                )
                finals[v.id] = pswap(
                    finals.get(v.id), proposal, i, config.choice, rngs[v.id]
                )
            records, table = run_loading(
                network,
                [(v, finals[v.id]) for v in vehicles],
                class_configs,
                config.loader,
                interval_s=config.interval_s,
            )
        except MixDtaError as exc:
            raise MixDtaError(f"iteration {i}: {exc}") from exc

        history = history.shifted(table)
        reports.append(_report(i, records, history))
        if i >= 1:
            g = reports[-1].hybrid_gap_s
            if g < config.epsilon_s:
                stop_reason = "epsilon"
                break
            if _plateaued(reports, config):
                stop_reason = "plateau"
                break
    return AssignmentResult(reports, records, stop_reason)


def _report(i: int, records, history: CostHistory) -> IterationReport:
    done = [r for r in records if r.finished]
    g1 = compute_gap1([r for r in done if r.vclass is VehicleClass.HDV])
    g2 = compute_gap2([r for r in done if r.vclass is VehicleClass.CAV], history)
    ttt, speed, dist = compute_metrics(records)
    return IterationReport(
        iteration=i,
        gap1_s=g1,
        gap2_s=g2,
        hybrid_gap_s=hybrid_gap(g1, g2),
        total_travel_time_h=ttt,
        avg_speed_kmh=speed,
        avg_distance_km=dist,
        unfinished_count=sum(1 for r in records if not r.finished),
    )


def _plateaued(reports, config: DtaConfig) -> bool:
    w = config.plateau_window
    if len(reports) < w + 1:
        return False
    tail = [r.hybrid_gap_s for r in reports[-(w + 1):]]
    for prev, cur in zip(tail, tail[1:]):
        ref = max(abs(prev), 1e-12)
        if abs(cur - prev) / ref >= config.plateau_rel_change:
            return False
    return True


def write_iteration_reports(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["iteration", "gap1_s", "gap2_s", "hybrid_gap_s", "ttt_h",
             "avg_speed_kmh", "avg_distance_km", "unfinished"]
        )
        for r in reports:
            w.writerow(
                [r.iteration, r.gap1_s, r.gap2_s, r.hybrid_gap_s,
                 r.total_travel_time_h, r.avg_speed_kmh, r.avg_distance_km,
                 r.unfinished_count]
            )
