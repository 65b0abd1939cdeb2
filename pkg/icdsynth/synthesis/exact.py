"""
Exact Pareto synthesis by distance layers.

The restricted grid is tabulated once; layer ``s`` holds the vectors at
distance exactly ``s``. Its best effectiveness and lexicographically smallest
witness are the only candidates a brute-force Pareto filter could keep from
that layer, so filtering the per-layer winners yields the exact front.
"""

import logging
import math
import time
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from ..errors import GridTooLargeError
from ..evaluation import Evaluator
from ..objectives import ParetoFront, pareto_filter
from ..parameters import PARAMETER_NAMES, ParameterDomain, ParamVector
from ..signals import FeatureSignal
from .config import Backend, LayerStats, SynthesisConfig, SynthesisRun

__all__ = ("grid_size", "exact_search", "synthesize_exact")

log = logging.getLogger(__name__)


def grid_size(config: SynthesisConfig, domains: ParameterDomain) -> int:
    return math.prod(hi - lo + 1 for lo, hi in config.index_ranges(domains).values())


def _distances(ranges, domains: ParameterDomain) -> np.ndarray:
    nominal = domains.nominal()
    shape = tuple(hi - lo + 1 for lo, hi in (ranges[name] for name in PARAMETER_NAMES))
    out = np.zeros(shape, dtype=np.int32)
    for axis, name in enumerate(PARAMETER_NAMES):
        lo, hi = ranges[name]
        offsets = np.abs(np.arange(lo, hi + 1) - getattr(nominal, name)).astype(np.int32)
        view = [1] * len(shape)
        view[axis] = len(offsets)
        np.maximum(out, offsets.reshape(view), out=out)
    return out


def exact_search(
    train: Iterable[FeatureSignal],
    domains: ParameterDomain,
    config: Optional[SynthesisConfig] = None,
    evaluator: Optional[Evaluator] = None,
) -> SynthesisRun:
    config = config or SynthesisConfig()
    size = grid_size(config, domains)
    if size > config.enum_cap:
        raise GridTooLargeError(size, config.enum_cap)

    began = time.perf_counter()
    if evaluator is None:
        evaluator = Evaluator(train, domains, workers=config.workers)
    ranges = config.index_ranges(domains)
    lows = np.array([ranges[name][0] for name in PARAMETER_NAMES])

    counts = evaluator.grid_counts(ranges)
    dist = _distances(ranges, domains)
    total = max(len(evaluator), 1)

    candidates = []
    layers = []
    best = Fraction(-1)
    best_witness = None
    reached = 0
    for s in range(config.horizon(domains) + 1):
        layer = dist == s
        points = int(layer.sum())
        if not points:
            continue
        reached += points
        top = int(counts[layer].max())
        first = np.flatnonzero(layer & (counts == top))[0]
        witness = ParamVector(*(int(i) for i in np.array(np.unravel_index(first, counts.shape)) + lows))
        effectiveness = Fraction(top, total) if len(evaluator) else Fraction(0)
        candidates.append((s, effectiveness, witness))

        if effectiveness > best:
            best, best_witness = effectiveness, witness
        layers.append(LayerStats(s, reached, best, best_witness))
        log.info("layer %d: %d points in box, best effectiveness %s", s, reached, best)

    front = pareto_filter(candidates)
    elapsed = time.perf_counter() - began
    log.info("exact front has %d points (%d grid points, %.2fs)", len(front), size, elapsed)
    return SynthesisRun(Backend.EXACT, front, size, elapsed, tuple(layers))


def synthesize_exact(
    train: Iterable[FeatureSignal],
    domains: ParameterDomain,
    config: Optional[SynthesisConfig] = None,
) -> ParetoFront:
    return exact_search(train, domains, config).front
