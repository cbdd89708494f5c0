"""Multiclass simulation-based dynamic traffic assignment for mixed CAV/HDV traffic.

HDVs seek user equilibrium on experienced travel times; CAVs seek system
optimum on marginal travel times with probabilistic en-route rerouting.
Network loading is a class-aware FIFO queue mesoscopic simulator.
"""

from .choice import ChoiceConfig, logit_probabilities, pswap, select_path
from .costs import (
    CostHistory,
    CostTable,
    aggregate_costs,
    link_cost,
    marginal_link_cost,
)
from .demand import (
    DEFAULT_CLASS_CONFIGS,
    ClassConfig,
    Demand,
    Vehicle,
    VehicleClass,
    expand_od,
    load_od_matrix,
)
from .dta import (
    AssignmentResult,
    DtaConfig,
    IterationReport,
    compute_gap1,
    compute_gap2,
    compute_metrics,
    hybrid_gap,
    run_assignment,
)
from .mesosim import (
    LoaderConfig,
    RegimeHeadways,
    TripRecord,
    regime_headway,
    run_loading,
)
from .network import (
    Link,
    Network,
    Node,
    free_flow_time,
    generate_random_network,
    load_network,
    save_network,
)
from .routing import Path, PathSet, path_cost, shortest_path_td, update_path_set

__version__ = "0.1.0"
