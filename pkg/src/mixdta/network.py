"""Directed road-network model: native JSON / TNTP import and synthetic generation.

The network is a plain directed graph.  Congestion is produced by the queue
loader, so TNTP capacities are carried along as metadata only.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from .errors import FormatError, ParameterError, UnknownIdError, ValidationError

# unit factors to meters / seconds for TNTP imports
_LENGTH_UNITS = {"m": 1.0, "km": 1000.0, "mi": 1609.344}
_TIME_UNITS = {"s": 1.0, "min": 60.0, "h": 3600.0}

DEFAULT_SPEED_MPS = 13.89  # 50 km/h


@dataclass(frozen=True)
class Node:
    id: str
    x: float
    y: float


@dataclass(frozen=True)
class Link:
    id: str
    frm: str
    to: str
    length_m: float
    lanes: int
    speed_limit_mps: float
    capacity_veh_h: float | None = None  # metadata (TNTP); unused by the loader

    def __post_init__(self):
        if self.frm == self.to:
            raise ValidationError(f"link {self.id}: self loop {self.frm}")
        if self.length_m <= 0:
            raise ValidationError(f"link {self.id}: length_m must be > 0")
        if self.lanes < 1:
            raise ValidationError(f"link {self.id}: lanes must be >= 1")
        if self.speed_limit_mps <= 0:
            raise ValidationError(f"link {self.id}: speed_limit_mps must be > 0")


class Network:
    """Immutable directed graph with an outgoing-link index per node."""

    def __init__(self, nodes: list[Node], links: list[Link]):
        self.nodes: dict[str, Node] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise ValidationError(f"duplicate node id {n.id}")
            self.nodes[n.id] = n
        self.links: dict[str, Link] = {}
        dangling = []
        for lk in links:
            if lk.id in self.links:
                raise ValidationError(f"duplicate link id {lk.id}")
            if lk.frm not in self.nodes or lk.to not in self.nodes:
                dangling.append(lk.id)
            self.links[lk.id] = lk
        if dangling:
            raise ValidationError(
                "links reference missing nodes: " + ", ".join(dangling)
            )
        self.out_links: dict[str, list[Link]] = {nid: [] for nid in self.nodes}
        for lk in self.links.values():
            self.out_links[lk.frm].append(lk)
        # deterministic adjacency order
        for adj in self.out_links.values():
            adj.sort(key=lambda l: l.id)

    def link(self, link_id: str) -> Link:
        try:
            return self.links[link_id]
        except KeyError:
            raise UnknownIdError(f"unknown link id {link_id}") from None

    def is_strongly_connected(self) -> bool:
        if not self.nodes:
            return False
        start = next(iter(self.nodes))
        fwd = {lk.frm: [] for lk in self.links.values()}
        rev = {lk.to: [] for lk in self.links.values()}
        for lk in self.links.values():
            fwd[lk.frm].append(lk.to)
            rev[lk.to].append(lk.frm)
        for adj in (fwd, rev):
            seen = {start}
            stack = [start]
            while stack:
                for nb in adj.get(stack.pop(), []):
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            if len(seen) != len(self.nodes):
                return False
        return True


def free_flow_time(link: Link) -> float:
    """Unobstructed traversal time of a link in seconds."""
    return link.length_m / link.speed_limit_mps


def load_network(
    path,
    fmt: str = "native",
    *,
    tntp_length_unit: str = "km",
    tntp_time_unit: str = "min",
    tntp_lanes: int = 2,
    tntp_node_path=None,
) -> Network:
    """Load a network from a native-JSON or TNTP net file."""
    if fmt == "native":
        return _load_native(path)
    if fmt == "tntp":
        return _load_tntp(
            path,
            length_unit=tntp_length_unit,
            time_unit=tntp_time_unit,
            lanes=tntp_lanes,
            node_path=tntp_node_path,
        )
    raise ParameterError(f"unknown network format {fmt!r}")


def _load_native(path) -> Network:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        nodes = [Node(str(n["id"]), float(n["x"]), float(n["y"])) for n in doc["nodes"]]
        links = [
            Link(
                str(l["id"]),
                str(l["from"]),
                str(l["to"]),
                float(l["length_m"]),
                int(l["lanes"]),
                float(l["speed_limit_mps"]),
                l.get("capacity_veh_h"),
            )
            for l in doc["links"]
        ]
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from None
    return Network(nodes, links)


def save_network(network: Network, path) -> None:
    doc = {
        "nodes": [{"id": n.id, "x": n.x, "y": n.y} for n in network.nodes.values()],
        "links": [
            {
                "id": l.id,
                "from": l.frm,
                "to": l.to,
                "length_m": l.length_m,
                "lanes": l.lanes,
                "speed_limit_mps": l.speed_limit_mps,
                **({"capacity_veh_h": l.capacity_veh_h} if l.capacity_veh_h is not None else {}),
            }
            for l in network.links.values()
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def _load_tntp(path, *, length_unit, time_unit, lanes, node_path) -> Network:
    if length_unit not in _LENGTH_UNITS:
        raise ParameterError(f"unknown length unit {length_unit!r}")
    if time_unit not in _TIME_UNITS:
        raise ParameterError(f"unknown time unit {time_unit!r}")
    len_f = _LENGTH_UNITS[length_unit]
    time_f = _TIME_UNITS[time_unit]

    links = []
    node_ids = set()
    in_body = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("~")[0].strip()
            if not line:
                continue
            if line.startswith("<"):
                if "END OF METADATA" in line:
                    in_body = True
                continue
            if not in_body:
                in_body = True  # some files omit the metadata block
            fields = line.rstrip(";").split()
            if len(fields) < 5:
                raise FormatError(f"{path}:{lineno}: expected >=5 fields, got {len(fields)}")
            try:
                init, term = fields[0], fields[1]
                capacity = float(fields[2])
                length = float(fields[3]) * len_f
                fft = float(fields[4]) * time_f
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if fft <= 0:
                raise FormatError(f"{path}:{lineno}: free flow time must be > 0")
            node_ids.update((init, term))
            links.append(
                Link(
                    f"{init}-{term}",
                    init,
                    term,
                    length,
                    lanes,
                    length / fft,
                    capacity_veh_h=capacity,
                )
            )
    coords = _load_tntp_nodes(node_path) if node_path else {}
    nodes = []
    for idx, nid in enumerate(sorted(node_ids, key=_node_sort_key)):
        if nid in coords:
            x, y = coords[nid]
        else:
            # no geometry in a plain net file: lay the nodes on a circle
            ang = 2 * math.pi * idx / max(1, len(node_ids))
            x, y = 1000 * math.cos(ang), 1000 * math.sin(ang)
        nodes.append(Node(nid, x, y))
    return Network(nodes, links)


def _load_tntp_nodes(path) -> dict[str, tuple[float, float]]:
    coords = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip().rstrip(";").strip()
            if not line or line.lower().startswith("node"):
                continue
            fields = line.split()
            if len(fields) >= 3:
                coords[fields[0]] = (float(fields[1]), float(fields[2]))
    return coords


def _node_sort_key(nid: str):
    return (0, int(nid)) if nid.isdigit() else (1, nid)


def generate_random_network(
    n_junctions: int,
    n_edges: int,
    len_range: tuple[float, float],
    lane_choices,
    seed: int,
    speed_mps: float = DEFAULT_SPEED_MPS,
) -> Network:
    """Generate a strongly connected random network.

    A random Hamiltonian cycle guarantees strong connectivity; the remaining
    edges are drawn uniformly from the unused node pairs.  Deterministic for
    a fixed seed.
    """
    if n_junctions < 2:
        raise ParameterError("n_junctions must be >= 2")
    if n_edges < n_junctions:
        raise ParameterError(
            "n_edges must be >= n_junctions (a strongly connected digraph "
            f"on {n_junctions} nodes needs at least {n_junctions} edges)"
        )
    if n_edges > n_junctions * (n_junctions - 1):
        raise ParameterError("n_edges exceeds n_junctions*(n_junctions-1)")
    lo, hi = len_range
    if lo <= 0 or hi < lo:
        raise ParameterError("len_range must satisfy 0 < min <= max")
    lane_choices = sorted(set(int(c) for c in lane_choices))
    if not lane_choices or lane_choices[0] < 1:
        raise ParameterError("lane_choices must be nonempty positive integers")

    rng = random.Random(seed)
    side = 500.0 * math.sqrt(n_junctions)
    nodes = [
        Node(f"n{i}", rng.uniform(0, side), rng.uniform(0, side))
        for i in range(n_junctions)
    ]
    order = list(range(n_junctions))
    rng.shuffle(order)
    pairs = [
        (order[i], order[(i + 1) % n_junctions]) for i in range(n_junctions)
    ]
    used = set(pairs)
    remaining = [
        (u, v)
        for u in range(n_junctions)
        for v in range(n_junctions)
        if u != v and (u, v) not in used
    ]
    pairs.extend(rng.sample(remaining, n_edges - n_junctions))

    links = [
        Link(
            f"e{i}",
            nodes[u].id,
            nodes[v].id,
            rng.uniform(lo, hi),
            rng.choice(lane_choices),
            speed_mps,
        )
        for i, (u, v) in enumerate(pairs)
    ]
    return Network(nodes, links)
