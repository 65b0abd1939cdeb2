"""
Experiments built on the synthesis backends: exact versus random search,
and the effect of the training set size on unseen signals.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

from ..errors import ConfigurationError
from ..evaluation import Evaluator
from ..objectives import auc, evaluate_front
from ..parameters import ParameterDomain
from ..signals import FeatureSignal, SignalSet
from .config import Backend, SynthesisConfig, SynthesisRun
from .exact import exact_search
from .random_search import random_search

__all__ = (
    "synthesize",
    "BackendComparison",
    "compare_backends",
    "SweepPoint",
    "training_size_sweep",
)

log = logging.getLogger(__name__)


def _tuple(signals) -> tuple:
    return signals.signals if isinstance(signals, SignalSet) else tuple(signals)


def synthesize(train, domains: ParameterDomain, config: SynthesisConfig) -> SynthesisRun:
    """Run the configured backend."""
    if config.backend is Backend.EXACT:
        return exact_search(train, domains, config)
    if config.backend is Backend.RANDOM:
        return random_search(train, domains, config)

    from ..smt.solver import solve_front

    return solve_front(train, domains, config)


def _fraction(x: Optional[Fraction]) -> Optional[float]:
    return None if x is None else float(x)


@dataclass(frozen=True)
class BackendComparison:
    exact: SynthesisRun
    random: SynthesisRun
    auc_train_exact: Fraction
    auc_train_random: Fraction
    auc_test_exact: Optional[Fraction] = None
    auc_test_random: Optional[Fraction] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "exact": {
                "front_size": len(self.exact.front),
                "auc_train": _fraction(self.auc_train_exact),
                "auc_test": _fraction(self.auc_test_exact),
            },
            "random": {
                "front_size": len(self.random.front),
                "evaluations": self.random.evaluations,
                "auc_train": _fraction(self.auc_train_random),
                "auc_test": _fraction(self.auc_test_random),
            },
        }


def compare_backends(
    train: Sequence[FeatureSignal],
    domains: ParameterDomain,
    config: SynthesisConfig,
    test: Optional[Sequence[FeatureSignal]] = None,
) -> BackendComparison:
    """
    Exact synthesis against random search on the same box.

    Random search gets ``config.budget`` evaluations, or the wall-clock time
    the exact run took when no budget is configured.
    """
    if config.seed is None:
        raise ConfigurationError("comparing against random search needs a seed")
    train = _tuple(train)
    evaluator = Evaluator(train, domains, workers=config.workers)

    exact = exact_search(train, domains, config.replace(backend=Backend.EXACT), evaluator)
    if config.budget is None and config.time_budget is None:
        random_config = config.replace(backend=Backend.RANDOM, time_budget=exact.elapsed)
    else:
        random_config = config.replace(backend=Backend.RANDOM)
    rand = random_search(train, domains, random_config, evaluator)

    horizon = domains.dist_max()
    result = dict(
        exact=exact,
        random=rand,
        auc_train_exact=auc(exact.front.pairs(), horizon),
        auc_train_random=auc(rand.front.pairs(), horizon),
    )
    if test is not None:
        tester = Evaluator(_tuple(test), domains, workers=config.workers)
        result["auc_test_exact"] = auc(evaluate_front(exact.front, test, domains, tester), horizon)
        result["auc_test_random"] = auc(evaluate_front(rand.front, test, domains, tester), horizon)
    log.info(
        "AUC on train: exact %s, random %s",
        float(result["auc_train_exact"]),
        float(result["auc_train_random"]),
    )
    return BackendComparison(**result)


class SweepPoint(NamedTuple):
    size: int
    test_auc: Fraction
    relative: Optional[Fraction]


def training_size_sweep(
    train: Sequence[FeatureSignal],
    test: Sequence[FeatureSignal],
    sizes: Sequence[int],
    domains: ParameterDomain,
    config: SynthesisConfig,
) -> List[SweepPoint]:
    """
    Test AUC of fronts synthesized from prefixes of ``train``.

    ``relative`` is the test AUC divided by the one of the largest size, or
    ``None`` when that one is zero.
    """
    train = _tuple(train)
    sizes = sorted(set(sizes))
    if not sizes or sizes[0] < 1 or sizes[-1] > len(train):
        raise ConfigurationError(f"sweep sizes must lie in 1..{len(train)}")

    tester = Evaluator(_tuple(test), domains, workers=config.workers)
    horizon = domains.dist_max()
    aucs = []
    for size in sizes:
        run = synthesize(train[:size], domains, config)
        value = auc(evaluate_front(run.front, test, domains, tester), horizon)
        aucs.append(value)
        log.info("training size %d: test AUC %s", size, float(value))

    reference = aucs[-1]
    return [
        SweepPoint(size, value, value / reference if reference else None)
        for size, value in zip(sizes, aucs)
    ]
