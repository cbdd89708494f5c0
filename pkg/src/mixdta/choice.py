"""Stochastic path selection (logit) and probabilistic path retention (PSwap)."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .costs import CostHistory
from .errors import ParameterError, ValidationError
from .routing import Path, PathSet, path_cost


@dataclass(frozen=True)
class ChoiceConfig:
    theta: float = 0.05   # logit scale, 1/seconds
    gamma: float = 50.0   # swap scale; keep probability is min(i/gamma, 1)
    rng_seed: int = 0

    def __post_init__(self):
        if self.theta < 0:
            raise ValidationError("theta must be >= 0")
        if self.gamma <= 0:
            raise ValidationError("gamma must be > 0")


def logit_probabilities(costs, theta: float) -> list[float]:
    """Softmax over negated costs; shifted by the minimum for stability."""
    if len(costs) == 0:
        raise ParameterError("empty cost list")
    c_min = min(costs)
    weights = [math.exp(-theta * (c - c_min)) for c in costs]
    total = sum(weights)
    return [w / total for w in weights]


def select_path(
    path_set: PathSet,
    history: CostHistory,
    depart_t: float,
    cost_kind: str,
    config: ChoiceConfig,
    rng: random.Random,
) -> Path:
    """Sample one path from the set by logit over current path costs."""
    if len(path_set) == 0:
        raise ParameterError("empty path set")
    costs = [path_cost(p, history, depart_t, cost_kind) for p in path_set.paths]
    probs = logit_probabilities(costs, config.theta)
    x = rng.random()
    acc = 0.0
    for p, pr in zip(path_set.paths, probs):
        acc += pr
        if x < acc:
            return p
    return path_set.paths[-1]  # x landed on accumulated rounding slack


def pswap(
    previous_final: Path | None,
    proposed: Path,
    i: int,
    config: ChoiceConfig,
    rng: random.Random,
) -> Path:
    """Keep the previous final path with probability min(i/gamma, 1)."""
    if i < 1:
        raise ParameterError("iteration index must be >= 1")
    if previous_final is None:
        return proposed
    rho = min(i / config.gamma, 1.0)
    return previous_final if rng.random() < rho else proposed
