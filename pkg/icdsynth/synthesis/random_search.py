"""
Random-search baseline.

Vectors are drawn uniformly from the same restricted box the exact backend
enumerates, with a seeded ``PCG64`` generator. The nominal vector is always
evaluated, so the front contains at least ``(0, 0)``.
"""

import logging
import time
from typing import Iterable, Optional

import numpy as np

from ..evaluation import Evaluator
from ..objectives import ParetoFront, pareto_filter
from ..parameters import PARAMETER_NAMES, ParameterDomain, ParamVector, distance
from ..signals import FeatureSignal
from .config import Backend, SynthesisConfig, SynthesisRun

__all__ = ("random_search", "synthesize_random", "DEFAULT_BUDGET")

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 1000
BATCH = 64


def random_search(
    train: Iterable[FeatureSignal],
    domains: ParameterDomain,
    config: SynthesisConfig,
    evaluator: Optional[Evaluator] = None,
) -> SynthesisRun:
    began = time.perf_counter()
    if evaluator is None:
        evaluator = Evaluator(train, domains, workers=config.workers)

    budget = config.budget
    if budget is None and config.time_budget is None:
        budget = DEFAULT_BUDGET
    deadline = None if config.time_budget is None else began + config.time_budget

    ranges = config.index_ranges(domains)
    lows = np.array([ranges[name][0] for name in PARAMETER_NAMES])
    highs = np.array([ranges[name][1] for name in PARAMETER_NAMES])
    rng = np.random.Generator(np.random.PCG64(config.seed))

    nominal = domains.nominal()
    seen = {nominal: evaluator.effectiveness(nominal)}
    drawn = 0
    while budget is None or drawn < budget:
        if deadline is not None and time.perf_counter() >= deadline:
            break
        size = BATCH if budget is None else min(BATCH, budget - drawn)
        batch = [ParamVector(*(int(i) for i in row)) for row in rng.integers(lows, highs + 1, size=(size, len(lows)))]
        evaluator.flips_many(batch)
        for v in batch:
            seen[v] = evaluator.effectiveness(v)
        drawn += size

    front = pareto_filter((distance(v, domains), e, v) for v, e in seen.items())
    elapsed = time.perf_counter() - began
    log.info(
        "random search: %d draws, %d distinct vectors, front of %d points (%.2fs)",
        drawn,
        len(seen),
        len(front),
        elapsed,
    )
    log.debug("memo cache: %s", evaluator.cache_info())
    return SynthesisRun(Backend.RANDOM, front, drawn, elapsed, notes={"distinct": len(seen)})


def synthesize_random(
    train: Iterable[FeatureSignal],
    domains: ParameterDomain,
    config: SynthesisConfig,
) -> ParetoFront:
    return random_search(train, domains, config).front
