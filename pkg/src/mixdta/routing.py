"""Time-dependent shortest paths and per-vehicle alternative path sets.

The label-setting search treats the binned cost field as FIFO-consistent
(arriving earlier at a node never hurts).  Ties are broken by fewer links,
then lexicographically smaller link-id sequence, so results are deterministic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .costs import CostHistory, link_cost, marginal_link_cost
from .errors import NoPathError, ParameterError, ValidationError
from .network import Network

COST_KINDS = ("experienced", "marginal")


def _cost_fn(cost_kind: str):
    if cost_kind == "experienced":
        return link_cost
    if cost_kind == "marginal":
        return marginal_link_cost
    raise ParameterError(f"unknown cost kind {cost_kind!r}")


@dataclass(frozen=True)
class Path:
    links: tuple[str, ...]
    origin: str
    destination: str

    def validate(self, network: Network) -> None:
        if not self.links:
            raise ValidationError("empty path")
        if len(set(self.links)) != len(self.links):
            raise ValidationError("repeated link in path")
        at = self.origin
        for lid in self.links:
            lk = network.link(lid)
            if lk.frm != at:
                raise ValidationError(f"path breaks at link {lid}: {lk.frm} != {at}")
            at = lk.to
        if at != self.destination:
            raise ValidationError(f"path ends at {at}, not {self.destination}")


class PathSet:
    """Up to k_max distinct alternative paths for one vehicle's OD."""

    def __init__(self, origin: str, destination: str):
        self.origin = origin
        self.destination = destination
        self.paths: list[Path] = []  # insertion order = age order

    def __len__(self):
        return len(self.paths)

    def __contains__(self, path: Path):
        return any(p.links == path.links for p in self.paths)


def path_cost(path: Path, history: CostHistory, depart_t: float, cost_kind: str) -> float:
    """Accumulate link costs along the path, advancing the clock each link."""
    fn = _cost_fn(cost_kind)
    t = depart_t
    for lid in path.links:
        t += fn(history, lid, t)
    return t - depart_t


def shortest_path_td(
    network: Network,
    history: CostHistory,
    origin: str,
    destination: str,
    depart_t: float,
    cost_kind: str,
) -> Path:
    """Time-dependent Dijkstra with deterministic tie-breaking."""
    if origin == destination:
        raise ParameterError("origin == destination")
    for nid in (origin, destination):
        if nid not in network.nodes:
            raise NoPathError(f"unknown node {nid}")
    fn = _cost_fn(cost_kind)
    # label: (arrival, n_links, link_sequence); lexicographic order is the
    # tie-break rule, so the heap orders on the full label
    heap = [(depart_t, 0, (), origin)]
    settled = set()
    while heap:
        arrival, n_links, seq, node = heapq.heappop(heap)
        if node in settled:
            continue
        settled.add(node)
        if node == destination:
            return Path(seq, origin, destination)
        for lk in network.out_links[node]:
            if lk.to in settled:
                continue
            heapq.heappush(
                heap,
                (arrival + fn(history, lk.id, arrival), n_links + 1, seq + (lk.id,), lk.to),
            )
    raise NoPathError(f"no path from {origin} to {destination}")


def update_path_set(
    path_set: PathSet,
    new_path: Path,
    history: CostHistory,
    depart_t: float,
    cost_kind: str,
    k_max: int,
) -> PathSet:
    """Insert a path; evict the currently most expensive one when over capacity."""
    if (new_path.origin, new_path.destination) != (path_set.origin, path_set.destination):
        raise ValidationError("path OD does not match path set OD")
    if new_path in path_set:
        return path_set
    path_set.paths.append(new_path)
    if len(path_set.paths) > k_max:
        costs = [path_cost(p, history, depart_t, cost_kind) for p in path_set.paths]
        worst = max(range(len(costs)), key=lambda i: (costs[i], -i))  # ties: older out
        del path_set.paths[worst]
    return path_set
