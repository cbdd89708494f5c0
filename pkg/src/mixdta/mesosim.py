"""Class-aware FIFO queue network loading with en-route CAV rerouting.

Each link is split into fixed-capacity FIFO segments.  A vehicle may leave
the head of its segment once it has spent the free-flow traversal time there
and the class-scaled minimum headway since the previous exit has elapsed;
it may enter the next segment only while that segment has spare capacity,
otherwise it waits in place (spillback).  The minimum headway depends on the
free/jammed regimes of the current and next segment, scaled by the follower
class's tau multiplier and divided by the downstream lane count.

One run is single-threaded over a global event heap; event order is the
correctness backbone.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

from .costs import CostTable, aggregate_costs
from .demand import ClassConfig, Vehicle, VehicleClass
from .errors import ParameterError, ValidationError
from .network import Link, Network
from .routing import Path

_EPS = 1e-9


@dataclass(frozen=True)
class RegimeHeadways:
    """Base minimum headways (s) for the four free/jammed regime combinations."""

    t_ff: float = 1.4
    t_fj: float = 1.4
    t_jf: float = 2.0
    t_jj: float = 1.7

    def __post_init__(self):
        for name in ("t_ff", "t_fj", "t_jf", "t_jj"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0")
        if self.t_jf < self.t_ff:
            raise ValidationError("t_jf must be >= t_ff (jam discharge no faster than free flow)")


def regime_headway(current_jammed: bool, next_jammed: bool, headways: RegimeHeadways) -> float:
    if current_jammed:
        return headways.t_jj if next_jammed else headways.t_jf
    return headways.t_fj if next_jammed else headways.t_ff


@dataclass
class LoaderConfig:
    horizon_s: float
    l_eff_m: float = 7.5
    jam_threshold: float = 0.8
    segment_length_m: float = 100.0
    regime_headways: RegimeHeadways = field(default_factory=RegimeHeadways)
    reroute_period_s: float = 60.0
    estimate_window: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.l_eff_m <= 0:
            raise ValidationError("l_eff_m must be > 0")
        if not 0 < self.jam_threshold <= 1:
            raise ValidationError("jam_threshold must be in (0,1]")
        if self.reroute_period_s <= 0:
            raise ValidationError("reroute_period_s must be > 0")
        if self.segment_length_m <= 0:
            raise ValidationError("segment_length_m must be > 0")
        if self.horizon_s <= 0:
            raise ValidationError("horizon_s must be > 0")


@dataclass
class TripRecord:
    vehicle_id: int
    vclass: VehicleClass
    origin: str
    destination: str
    depart_s: float
    arrive_s: float
    link_times: list  # [(link_id, entry_s, exit_s-or-None), ...]
    distance_m: float
    reroute_count: int
    finished: bool


class LinkTimeEstimator:
    """Rolling estimate of instantaneous link times from recent traversals.

    Keeps the last `window` completed traversals per link; the estimate is
    their mean over the trailing `max_age_s` seconds, floored at free flow.
    """

    def __init__(self, free_flow: dict[str, float], window: int, max_age_s: float):
        self.free_flow = free_flow
        self.window = window
        self.max_age_s = max_age_s
        self._recent: dict[str, deque] = {lid: deque(maxlen=window) for lid in free_flow}

    def record(self, link_id: str, finish_s: float, duration_s: float) -> None:
        self._recent[link_id].append((finish_s, duration_s))

    def estimate(self, link_id: str, now: float) -> float:
        ff = self.free_flow[link_id]
        obs = [d for (t, d) in self._recent[link_id] if now - t <= self.max_age_s]
        if not obs:
            return ff
        return max(ff, sum(obs) / len(obs))


def estimate_link_time(estimator: LinkTimeEstimator, link_id: str, now: float) -> float:
    return estimator.estimate(link_id, now)


class _Segment:
    __slots__ = (
        "key", "link_id", "index", "length_m", "lanes", "capacity",
        "min_traverse", "queue", "last_exit", "waiters",
    )

    def __init__(self, key, link: Link, index: int, length_m: float, l_eff_m: float):
        self.key = key
        self.link_id = link.id
        self.index = index
        self.length_m = length_m
        self.lanes = link.lanes
        self.capacity = max(1, int(length_m * link.lanes / l_eff_m))
        self.min_traverse = length_m / link.speed_limit_mps
        self.queue = deque()      # vehicle ids, FIFO; occupants of the segment
        self.last_exit = None     # time of the most recent exit
        self.waiters = []         # [(kind, vid)] blocked on entering this segment

    @property
    def occupancy(self) -> int:
        return len(self.queue)

    def jammed(self, threshold: float) -> bool:
        return self.occupancy >= threshold * self.capacity


class _VehState:
    __slots__ = (
        "veh", "tau", "path", "link_idx", "seg", "seg_entry", "link_entry",
        "link_times", "distance_m", "reroutes", "inserted", "done", "blocked",
        "pre_insert_done",
    )

    def __init__(self, veh: Vehicle, tau: float, path: Path):
        self.veh = veh
        self.tau = tau
        self.path = list(path.links)
        self.link_idx = 0
        self.seg = None
        self.seg_entry = 0.0
        self.link_entry = 0.0
        self.link_times = []
        self.distance_m = 0.0
        self.reroutes = 0
        self.inserted = False
        self.done = False
        self.blocked = False
        self.pre_insert_done = False


@dataclass
class SimTrace:
    """Per-segment entry/exit logs for property checks."""

    entries: dict = field(default_factory=dict)  # seg key -> [(vid, t)]
    exits: dict = field(default_factory=dict)    # seg key -> [(vid, t, applied_headway)]
    max_occupancy: dict = field(default_factory=dict)


class QueueLoader:
    """One network-loading run over a fixed set of (vehicle, final path) pairs."""

    def __init__(
        self,
        network: Network,
        assignments,  # iterable of (Vehicle, Path)
        class_configs: dict[VehicleClass, ClassConfig],
        config: LoaderConfig,
        interval_s: float = 900.0,
        collect_trace: bool = False,
    ):
        self.network = network
        self.config = config
        self.class_configs = class_configs
        self.trace = SimTrace() if collect_trace else None

        self.segments: dict[str, list[_Segment]] = {}
        for lid, lk in network.links.items():
            n_seg = max(1, round(lk.length_m / config.segment_length_m))
            seg_len = lk.length_m / n_seg
            self.segments[lid] = [
                _Segment((lid, i), lk, i, seg_len, config.l_eff_m) for i in range(n_seg)
            ]

        ff = {lid: lk.length_m / lk.speed_limit_mps for lid, lk in network.links.items()}
        self.estimator = LinkTimeEstimator(
            ff, config.estimate_window, max_age_s=interval_s
        )

        self.states: dict[int, _VehState] = {}
        self.heap = []
        self._seq = 0
        self._finished: list[TripRecord] = []
        for veh, path in assignments:
            path.validate(network)
            if (path.origin, path.destination) != (veh.origin, veh.destination):
                raise ValidationError(f"vehicle {veh.id}: path OD mismatch")
            tau = class_configs[veh.vclass].tau_multiplier
            st = _VehState(veh, tau, path)
            self.states[veh.id] = st
            self._push(veh.depart_s, "insert", veh.id)
            if veh.reroute_enabled:
                self._push(veh.depart_s + config.reroute_period_s, "reroute", veh.id)

    # -- event plumbing ----------------------------------------------------

    def _push(self, t: float, kind: str, vid: int) -> None:
        heapq.heappush(self.heap, (t, self._seq, kind, vid))
        self._seq += 1

    def run(self) -> list[TripRecord]:
        horizon = self.config.horizon_s
        heap = self.heap
        while heap and heap[0][0] <= horizon:
            t, _, kind, vid = heapq.heappop(heap)
            st = self.states[vid]
            if st.done:
                continue
            if kind == "advance":
                self._advance(st, t)
            elif kind == "insert":
                self._insert(st, t)
            else:
                self._reroute(st, t)
        records = []
        for st in self.states.values():
            if st.done:
                continue
            # still en route (or never inserted) at horizon; the open link
            # observation stays open and is skipped by cost aggregation
            records.append(self._record(st, arrive=horizon, finished=False))
        records.extend(self._finished)
        records.sort(key=lambda r: r.vehicle_id)
        return records

    # -- event handlers ----------------------------------------------------

    def _insert(self, st: _VehState, t: float) -> None:
        if not st.pre_insert_done:
            st.pre_insert_done = True
            if st.veh.reroute_enabled:
                self._pre_insert_reroute(st, t)
        seg = self.segments[st.path[0]][0]
        if seg.occupancy >= seg.capacity:
            seg.waiters.append(("insert", st.veh.id))
            return
        st.inserted = True
        st.link_entry = t
        st.link_times.append([st.path[0], t, None])
        self._enter(st, seg, t)

    def _enter(self, st: _VehState, seg: _Segment, t: float) -> None:
        seg.queue.append(st.veh.id)
        st.seg = seg
        st.seg_entry = t
        st.blocked = False
        if self.trace is not None:
            self.trace.entries.setdefault(seg.key, []).append((st.veh.id, t))
            cur = self.trace.max_occupancy.get(seg.key, 0)
            self.trace.max_occupancy[seg.key] = max(cur, seg.occupancy)
        if seg.queue[0] == st.veh.id:
            self._push(t + seg.min_traverse, "advance", st.veh.id)

    def _next_segment(self, st: _VehState):
        seg = st.seg
        link_segs = self.segments[st.path[st.link_idx]]
        if seg.index + 1 < len(link_segs):
            return link_segs[seg.index + 1]
        if st.link_idx + 1 < len(st.path):
            return self.segments[st.path[st.link_idx + 1]][0]
        return None  # destination reached after this segment

    def _advance(self, st: _VehState, t: float) -> None:
        seg = st.seg
        if seg is None or seg.queue[0] != st.veh.id or st.blocked:
            return  # stale event; the head exit path reschedules us
        nxt = self._next_segment(st)
        thr = self.config.jam_threshold
        base = regime_headway(
            seg.jammed(thr), nxt.jammed(thr) if nxt is not None else False,
            self.config.regime_headways,
        )
        lanes = nxt.lanes if nxt is not None else seg.lanes
        h = st.tau * base / lanes
        ready = st.seg_entry + seg.min_traverse
        if seg.last_exit is not None:
            ready = max(ready, seg.last_exit + h)
        if t < ready - _EPS:
            self._push(ready, "advance", st.veh.id)
            return
        if nxt is not None and nxt.occupancy >= nxt.capacity:
            st.blocked = True
            nxt.waiters.append(("advance", st.veh.id))
            return
        # exit the current segment
        seg.queue.popleft()
        seg.last_exit = t
        if self.trace is not None:
            self.trace.exits.setdefault(seg.key, []).append((st.veh.id, t, h))
        if seg.queue:
            self._push(t, "advance", seg.queue[0])
        self._wake(seg, t)
        leaving_link = nxt is None or nxt.link_id != seg.link_id
        if leaving_link:
            lk = self.network.links[st.path[st.link_idx]]
            st.link_times[-1][2] = t
            st.distance_m += lk.length_m
            self.estimator.record(lk.id, t, t - st.link_entry)
        if nxt is None:
            st.done = True
            st.seg = None
            self._finished.append(self._record(st, arrive=t, finished=True))
            return
        if leaving_link:
            st.link_idx += 1
            st.link_entry = t
            st.link_times.append([st.path[st.link_idx], t, None])
        self._enter(st, nxt, t)

    def _wake(self, seg: _Segment, t: float) -> None:
        # one exit frees exactly one slot: wake only the longest waiter
        if not seg.waiters:
            return
        kind, vid = seg.waiters.pop(0)
        w = self.states[vid]
        w.blocked = False
        self._push(t, kind, vid)

    # -- rerouting ---------------------------------------------------------

    def _pre_insert_reroute(self, st: _VehState, t: float) -> None:
        best = self._dijkstra_est(st.veh.origin, st.veh.destination, t)
        if best is None:
            return
        links, cost = best
        current = sum(self.estimator.estimate(lid, t) for lid in st.path)
        if cost < current - _EPS and links != st.path:
            st.path = links
            st.reroutes += 1

    def _reroute(self, st: _VehState, t: float) -> None:
        if st.done:
            return
        self._push(t + self.config.reroute_period_s, "reroute", st.veh.id)
        if not st.inserted:
            return
        # the current link must be finished either way; compare the remainders
        via = self.network.links[st.path[st.link_idx]].to
        if via == st.veh.destination:
            return
        best = self._dijkstra_est(via, st.veh.destination, t)
        if best is None:
            return
        links, cost = best
        tail = st.path[st.link_idx + 1:]
        current = sum(self.estimator.estimate(lid, t) for lid in tail)
        if cost < current - _EPS and links != tail:
            new_path = st.path[: st.link_idx + 1] + links
            if len(set(new_path)) == len(new_path):  # keep the path simple
                st.path = new_path
                st.reroutes += 1

    def _dijkstra_est(self, origin: str, destination: str, now: float):
        """Static shortest path on instantaneous link-time estimates."""
        est = self.estimator.estimate
        heap = [(0.0, (), origin)]
        settled = set()
        while heap:
            cost, seq, node = heapq.heappop(heap)
            if node in settled:
                continue
            settled.add(node)
            if node == destination:
                return list(seq), cost
            for lk in self.network.out_links[node]:
                if lk.to not in settled:
                    heapq.heappush(heap, (cost + est(lk.id, now), seq + (lk.id,), lk.to))
        return None

    # -- output ------------------------------------------------------------

    def _record(self, st: _VehState, arrive: float, finished: bool) -> TripRecord:
        return TripRecord(
            vehicle_id=st.veh.id,
            vclass=st.veh.vclass,
            origin=st.veh.origin,
            destination=st.veh.destination,
            depart_s=st.veh.depart_s,
            arrive_s=max(arrive, st.veh.depart_s),
            link_times=[tuple(lt) for lt in st.link_times],
            distance_m=st.distance_m,
            reroute_count=st.reroutes,
            finished=finished,
        )


def run_loading(
    network: Network,
    assignments,
    class_configs: dict[VehicleClass, ClassConfig],
    config: LoaderConfig,
    interval_s: float = 900.0,
    collect_trace: bool = False,
):
    """Simulate one loading; returns (trip records, cost table[, trace])."""
    loader = QueueLoader(
        network, assignments, class_configs, config,
        interval_s=interval_s, collect_trace=collect_trace,
    )
    records = loader.run()
    table = aggregate_costs(records, network, interval_s)
    if collect_trace:
        return records, table, loader.trace
    return records, table
