"""CSV and figure emission for scenario runs and sweeps."""

from __future__ import annotations

import csv
from collections import Counter

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.collections import LineCollection

from .network import Network


def write_trip_records(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["vehicle_id", "class", "origin", "destination", "depart_s",
             "arrive_s", "distance_m", "reroute_count", "finished"]
        )
        for r in records:
            w.writerow(
                [r.vehicle_id, r.vclass.value, r.origin, r.destination,
                 r.depart_s, r.arrive_s, r.distance_m, r.reroute_count,
                 int(r.finished)]
            )


def link_volumes(records) -> Counter:
    """Vehicles entering each link, over all trip records."""
    vol = Counter()
    for r in records:
        for lid, _, _ in r.link_times:
            vol[lid] += 1
    return vol


def write_link_volumes(records, path) -> None:
    vol = link_volumes(records)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["link_id", "volume_veh"])
        for lid in sorted(vol):
            w.writerow([lid, vol[lid]])


def write_summary(report, stop_reason, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["iterations", "stop_reason", "final_gap_s", "ttt_h",
             "avg_speed_kmh", "avg_distance_km", "unfinished"]
        )
        w.writerow(
            [report.iteration + 1, stop_reason, report.hybrid_gap_s,
             report.total_travel_time_h, report.avg_speed_kmh,
             report.avg_distance_km, report.unfinished_count]
        )


def plot_convergence(reports, path) -> None:
    its = [r.iteration for r in reports]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax1.plot(its, [r.hybrid_gap_s for r in reports], "o-", label="hybrid gap")
    ax1.plot(its, [r.gap1_s for r in reports], "s--", alpha=0.6, label="HDV gap")
    ax1.plot(its, [r.gap2_s for r in reports], "^--", alpha=0.6, label="CAV gap")
    ax1.set_ylabel("gap (s)")
    ax1.legend(fontsize=8)
    ax2.plot(its, [r.total_travel_time_h for r in reports], "o-", color="tab:red")
    ax2.set_ylabel("total travel time (h)")
    ax2.set_xlabel("iteration")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_link_volumes(network: Network, records, path) -> None:
    vol = link_volumes(records)
    vmax = max(vol.values()) if vol else 1
    links = list(network.links.values())
    segs = np.array(
        [
            [
                [network.nodes[lk.frm].x, network.nodes[lk.frm].y],
                [network.nodes[lk.to].x, network.nodes[lk.to].y],
            ]
            for lk in links
        ],
        dtype=float,
    )
    vols = np.array([vol.get(lk.id, 0) for lk in links], dtype=float)
    fig, ax = plt.subplots(figsize=(7, 7))
    lc = LineCollection(
        segs, cmap="viridis", norm=plt.Normalize(0, vmax), capstyle="round"
    )
    lc.set_array(vols)
    lc.set_linewidth(0.5 + 3.0 * vols / vmax)
    ax.add_collection(lc)
    ax.scatter(
        [n.x for n in network.nodes.values()],
        [n.y for n in network.nodes.values()],
        s=8, color="k", zorder=3,
    )
    ax.autoscale()
    ax.set_aspect("equal")
    ax.set_axis_off()
    fig.colorbar(lc, ax=ax, shrink=0.7, label="volume (veh)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_sweep_summary(rows, path) -> None:
    """rows: list of dicts with pr, ttt_h, avg_speed_kmh, avg_distance_km, final_gap_s."""
    base_ttt = next((r["ttt_h"] for r in rows if r["pr"] == 0), None)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["pr", "ttt_h", "avg_speed_kmh", "avg_distance_km", "final_gap_s",
             "ttt_improvement_pct"]
        )
        for r in rows:
            if base_ttt:
                impr = 100.0 * (base_ttt - r["ttt_h"]) / base_ttt
            else:
                impr = 0.0
            w.writerow(
                [r["pr"], r["ttt_h"], r["avg_speed_kmh"], r["avg_distance_km"],
                 r["final_gap_s"], impr]
            )


def plot_sweep(rows, path) -> None:
    prs = [r["pr"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(prs, [r["ttt_h"] for r in rows], "o-")
    ax.set_xlabel("CAV penetration rate (%)")
    ax.set_ylabel("total travel time (h)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
