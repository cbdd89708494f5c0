"""OD demand, class assignment by penetration rate, trip-list expansion."""

from __future__ import annotations

import csv
import enum
import math
import random
from dataclasses import dataclass

from .errors import ParameterError, ValidationError
from .network import Network


class VehicleClass(enum.Enum):
    HDV = "HDV"
    CAV = "CAV"


@dataclass(frozen=True)
class ClassConfig:
    vclass: VehicleClass
    tau_multiplier: float
    reroute_probability: float
    routing_principle: str  # "UE" or "SO"

    def __post_init__(self):
        if self.tau_multiplier <= 0:
            raise ValidationError(f"{self.vclass.value}: tau_multiplier must be > 0")
        if not 0.0 <= self.reroute_probability <= 1.0:
            raise ValidationError(
                f"{self.vclass.value}: reroute_probability must be in [0,1]"
            )
        if self.routing_principle not in ("UE", "SO"):
            raise ValidationError(
                f"{self.vclass.value}: routing_principle must be UE or SO"
            )


# calibrated headway multipliers for the two classes
DEFAULT_CLASS_CONFIGS = {
    VehicleClass.HDV: ClassConfig(VehicleClass.HDV, 1.06, 0.0, "UE"),
    VehicleClass.CAV: ClassConfig(VehicleClass.CAV, 0.79, 0.5, "SO"),
}


@dataclass(frozen=True)
class Vehicle:
    id: int
    vclass: VehicleClass
    origin: str
    destination: str
    depart_s: float
    reroute_enabled: bool

    def __post_init__(self):
        if self.origin == self.destination:
            raise ValidationError(f"vehicle {self.id}: origin == destination")
        if self.depart_s < 0:
            raise ValidationError(f"vehicle {self.id}: negative departure")


@dataclass(frozen=True)
class Demand:
    vehicles: tuple[Vehicle, ...]
    horizon_s: float


def load_od_matrix(path, network: Network | None = None) -> list[tuple[str, str, int]]:
    """Read `origin,destination,count` CSV; zero-count rows are dropped."""
    entries = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"origin", "destination", "count"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValidationError(f"{path}: header must contain {sorted(required)}")
        for row in reader:
            o, d = row["origin"].strip(), row["destination"].strip()
            count = float(row["count"])
            if count < 0:
                raise ValidationError(f"{path}: negative count for {o}->{d}")
            if network is not None:
                for nid in (o, d):
                    if nid not in network.nodes:
                        raise ValidationError(f"{path}: unknown node id {nid}")
            n = int(round(count))
            if n > 0 and o != d:
                entries.append((o, d, n))
    return entries


def expand_od(
    entries,
    pr_cav: float,
    depart_window: tuple[float, float],
    reroute_probability: float,
    seed: int,
) -> Demand:
    """Expand OD counts into a vehicle list.

    The CAV/HDV split is deterministic largest-remainder rounding across
    entries, so sweeps over pr_cav differ only in class labels.  Departure
    times are drawn from an rng stream independent of the class labels for
    the same reason.
    """
    if not 0.0 <= pr_cav <= 100.0:
        raise ParameterError("pr_cav must be in [0,100]")
    t0, t1 = depart_window
    if t1 <= t0:
        raise ParameterError("depart_window must satisfy t1 > t0")
    if not 0.0 <= reroute_probability <= 1.0:
        raise ParameterError("reroute_probability must be in [0,1]")

    total = sum(n for _, _, n in entries)
    target_cav = int(round(total * pr_cav / 100.0))
    base = [math.floor(n * pr_cav / 100.0) for _, _, n in entries]
    leftover = target_cav - sum(base)
    # largest fractional remainders get the leftover CAVs; ties by entry order
    remainders = sorted(
        range(len(entries)),
        key=lambda i: (-(entries[i][2] * pr_cav / 100.0 - base[i]), i),
    )
    n_cav = list(base)
    for i in remainders[:leftover]:
        n_cav[i] += 1

    rng_depart = random.Random(f"{seed}:depart")
    rng_flags = random.Random(f"{seed}:flags")
    vehicles = []
    vid = 0
    for (o, d, n), k_cav in zip(entries, n_cav):
        for j in range(n):
            depart = rng_depart.uniform(t0, t1)
            if j < k_cav:
                vclass = VehicleClass.CAV
                reroute = rng_flags.random() < reroute_probability
            else:
                vclass = VehicleClass.HDV
                reroute = False
            vehicles.append(Vehicle(vid, vclass, o, d, depart, reroute))
            vid += 1
    return Demand(tuple(vehicles), horizon_s=t1)


def write_trip_list(demand: Demand, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["vehicle_id", "class", "origin", "destination", "depart_s", "reroute_enabled"]
        )
        for v in demand.vehicles:
            w.writerow(
                [v.id, v.vclass.value, v.origin, v.destination, v.depart_s,
                 int(v.reroute_enabled)]
            )
