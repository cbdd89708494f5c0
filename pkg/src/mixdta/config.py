"""Scenario configuration: JSON schema, default materialization, scenario build.

`resolve_config` expands every default into the returned document, so the
echoed effective config is itself a complete, loadable config (idempotent
resolution).
"""

from __future__ import annotations

import copy
import json
import os

from .choice import ChoiceConfig
from .demand import (
    ClassConfig,
    Demand,
    VehicleClass,
    expand_od,
    load_od_matrix,
)
from .dta import DtaConfig
from .errors import ConfigError, MixDtaError
from .mesosim import LoaderConfig, RegimeHeadways
from .network import Network, generate_random_network, load_network

_CLASS_DEFAULTS = {
    "HDV": {"tau": 1.06, "reroute_probability": 0.0, "routing": "UE"},
    "CAV": {"tau": 0.79, "reroute_probability": 0.5, "routing": "SO"},
}

_DTA_DEFAULTS = {
    "max_iterations": 50,
    "epsilon_s": 5.0,
    "plateau_window": 3,
    "plateau_rel_change": 0.02,
    "theta": 0.05,
    "gamma": 50.0,
    "k_max": 4,
    "interval_s": 900.0,
}

_LOADER_DEFAULTS = {
    "l_eff_m": 7.5,
    "jam_threshold": 0.8,
    "segment_length_m": 100.0,
    "headways": {"ff": 1.4, "fj": 1.4, "jf": 2.0, "jj": 1.7},
    "reroute_period_s": 60.0,
}

_NETWORK_FILE_DEFAULTS = {
    "format": "native",
    "tntp_length_unit": "km",
    "tntp_time_unit": "min",
    "tntp_lanes": 2,
    "tntp_node_file": None,
}

_GENERATE_DEFAULTS = {
    "len_range": [200.0, 1000.0],
    "lane_choices": [1, 2],
    "speed_mps": 13.89,
}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return resolve_config(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def resolve_config(raw: dict, base_dir: str = ".") -> dict:
    """Validate and return the effective config with every default expanded."""
    cfg = copy.deepcopy(raw)

    net = cfg.get("network")
    if not isinstance(net, dict):
        raise ConfigError("network: section missing")
    if ("file" in net) == ("generate" in net):
        raise ConfigError("network: exactly one of 'file' or 'generate' required")
    if "file" in net:
        merged = {**_NETWORK_FILE_DEFAULTS, **net}
        merged["file"] = _abspath(merged["file"], base_dir)
        if not os.path.exists(merged["file"]):
            raise ConfigError(f"network.file: no such file {merged['file']}")
        if merged["format"] not in ("native", "tntp"):
            raise ConfigError("network.format: must be 'native' or 'tntp'")
        if merged["tntp_node_file"]:
            merged["tntp_node_file"] = _abspath(merged["tntp_node_file"], base_dir)
        cfg["network"] = merged
    else:
        gen = {**_GENERATE_DEFAULTS, **net["generate"]}
        for key in ("n_junctions", "n_edges"):
            if key not in gen:
                raise ConfigError(f"network.generate.{key}: required")
        cfg["network"] = {"generate": gen}

    dem = cfg.get("demand")
    if not isinstance(dem, dict) or "od_file" not in dem:
        raise ConfigError("demand.od_file: required")
    dem = {"scale": 1.0, **dem}
    dem["od_file"] = _abspath(dem["od_file"], base_dir)
    if not os.path.exists(dem["od_file"]):
        raise ConfigError(f"demand.od_file: no such file {dem['od_file']}")
    window = dem.get("depart_window")
    if (
        not isinstance(window, (list, tuple))
        or len(window) != 2
        or not window[1] > window[0]
    ):
        raise ConfigError("demand.depart_window: must be [t0, t1] with t1 > t0")
    cfg["demand"] = dem

    pr = cfg.setdefault("pr_cav", 0.0)
    if not 0 <= pr <= 100:
        raise ConfigError("pr_cav: must be in [0,100]")

    classes = cfg.setdefault("classes", {})
    for name, defaults in _CLASS_DEFAULTS.items():
        merged = {**defaults, **classes.get(name, {})}
        if merged["tau"] <= 0:
            raise ConfigError(f"classes.{name}.tau: must be > 0")
        if not 0 <= merged["reroute_probability"] <= 1:
            raise ConfigError(f"classes.{name}.reroute_probability: must be in [0,1]")
        if merged["routing"] not in ("UE", "SO"):
            raise ConfigError(f"classes.{name}.routing: must be UE or SO")
        classes[name] = merged

    dta = {**_DTA_DEFAULTS, **cfg.get("dta", {})}
    loader = {**_LOADER_DEFAULTS, **dta.get("loader", {})}
    loader["headways"] = {**_LOADER_DEFAULTS["headways"], **loader.get("headways", {})}
    loader.setdefault("horizon_s", 2.0 * cfg["demand"]["depart_window"][1])
    dta["loader"] = loader
    cfg["dta"] = dta

    cfg.setdefault("seed", 0)
    cfg.setdefault("output_dir", "out")
    cfg["output_dir"] = _abspath(cfg["output_dir"], base_dir)

    # surface invariant violations now rather than mid-run
    try:
        build_dta_config(cfg)
        build_class_configs(cfg)
    except MixDtaError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _abspath(path, base_dir):
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base_dir, path))


def build_network(cfg: dict) -> Network:
    net = cfg["network"]
    if "file" in net:
        return load_network(
            net["file"],
            net["format"],
            tntp_length_unit=net["tntp_length_unit"],
            tntp_time_unit=net["tntp_time_unit"],
            tntp_lanes=net["tntp_lanes"],
            tntp_node_path=net["tntp_node_file"],
        )
    gen = net["generate"]
    return generate_random_network(
        gen["n_junctions"],
        gen["n_edges"],
        tuple(gen["len_range"]),
        gen["lane_choices"],
        seed=cfg["seed"],
        speed_mps=gen["speed_mps"],
    )


def build_demand(cfg: dict, network: Network) -> Demand:
    dem = cfg["demand"]
    entries = load_od_matrix(dem["od_file"], network)
    scale = dem["scale"]
    if scale != 1.0:
        entries = [
            (o, d, int(round(n * scale))) for o, d, n in entries
            if int(round(n * scale)) > 0
        ]
    return expand_od(
        entries,
        pr_cav=cfg["pr_cav"],
        depart_window=tuple(dem["depart_window"]),
        reroute_probability=cfg["classes"]["CAV"]["reroute_probability"],
        seed=cfg["seed"],
    )


def build_class_configs(cfg: dict) -> dict[VehicleClass, ClassConfig]:
    out = {}
    for name, c in cfg["classes"].items():
        vc = VehicleClass(name)
        out[vc] = ClassConfig(vc, c["tau"], c["reroute_probability"], c["routing"])
    return out


def build_dta_config(cfg: dict) -> DtaConfig:
    dta = cfg["dta"]
    ld = dta["loader"]
    hw = ld["headways"]
    loader = LoaderConfig(
        horizon_s=ld["horizon_s"],
        l_eff_m=ld["l_eff_m"],
        jam_threshold=ld["jam_threshold"],
        segment_length_m=ld["segment_length_m"],
        regime_headways=RegimeHeadways(hw["ff"], hw["fj"], hw["jf"], hw["jj"]),
        reroute_period_s=ld["reroute_period_s"],
        rng_seed=cfg["seed"],
    )
    return DtaConfig(
        loader=loader,
        choice=ChoiceConfig(
            theta=dta["theta"], gamma=dta["gamma"], rng_seed=cfg["seed"]
        ),
        max_iterations=dta["max_iterations"],
        epsilon_s=dta["epsilon_s"],
        plateau_window=dta["plateau_window"],
        plateau_rel_change=dta["plateau_rel_change"],
        k_max=dta["k_max"],
        interval_s=dta["interval_s"],
        seed=cfg["seed"],
    )
