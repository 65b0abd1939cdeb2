"""
Attack objectives and Pareto fronts.

Effectiveness is the fraction of signals whose therapy reachability flips
with respect to the nominal parameters; stealthiness is the index distance
from the nominal vector. Both are exact: effectiveness is a
:class:`~fractions.Fraction` with denominator ``|S|``.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Any,
    Dict,
    Iterable,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from .discriminator import TherapySignal, run
from .evaluation import Evaluator
from .parameters import ParameterDomain, ParamVector, format_value, to_params
from .signals import FeatureSignal, SignalSet

__all__ = (
    "ParetoPoint",
    "ParetoFront",
    "FrontStats",
    "reachability",
    "baseline_reach",
    "effectiveness",
    "flip_fraction",
    "dominates",
    "pareto_filter",
    "validation_score",
    "auc",
    "evaluate_front",
    "front_statistics",
    "distance_for_levels",
    "DEFAULT_LEVELS",
)

log = logging.getLogger(__name__)

DEFAULT_LEVELS = tuple(Fraction(i, 10) for i in range(1, 11))

Signals = Union[SignalSet, Iterable[FeatureSignal]]


class ParetoPoint(NamedTuple):
    distance: int
    effectiveness: Fraction
    witness: ParamVector


@dataclass(frozen=True)
class ParetoFront:
    """Non-dominated points sorted by increasing distance."""

    points: Tuple[ParetoPoint, ...] = ()

    def __iter__(self) -> Iterator[ParetoPoint]:
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, item) -> ParetoPoint:
        return self.points[item]

    def pairs(self) -> List[Tuple[int, Fraction]]:
        return [(p.distance, p.effectiveness) for p in self.points]

    def best(self) -> Optional[ParetoPoint]:
        return self.points[-1] if self.points else None

    def to_json(self, domains: ParameterDomain) -> List[Dict[str, Any]]:
        out = []
        for point in self.points:
            values = domains.values_of(point.witness)
            out.append(
                {
                    "distance": point.distance,
                    "effectiveness": f"{point.effectiveness.numerator}/{point.effectiveness.denominator}",
                    "witness": dict(point.witness._asdict()),
                    "values": {name: format_value(value) for name, value in values.items()},
                }
            )
        return out


@dataclass(frozen=True)
class FrontStats:
    size: int
    effectiveness_mean: Fraction
    effectiveness_min: Fraction
    effectiveness_max: Fraction
    distance_mean: Fraction
    distance_min: int
    distance_max: int
    signal_length_mean: Fraction
    signal_length_min: int
    signal_length_max: int
    validation_score: Optional[Fraction] = None
    elapsed: Optional[float] = None

    def to_json(self) -> Dict[str, Any]:
        def num(x):
            return None if x is None else float(x)

        return {
            "size": self.size,
            "effectiveness": {
                "mean": num(self.effectiveness_mean),
                "min": num(self.effectiveness_min),
                "max": num(self.effectiveness_max),
            },
            "distance": {
                "mean": num(self.distance_mean),
                "min": self.distance_min,
                "max": self.distance_max,
            },
            "signal_length": {
                "mean": num(self.signal_length_mean),
                "min": self.signal_length_min,
                "max": self.signal_length_max,
            },
            "validation_score": num(self.validation_score),
        }


def _signals(signals: Signals) -> Tuple[FeatureSignal, ...]:
    if isinstance(signals, SignalSet):
        return signals.signals
    return tuple(signals)


def reachability(therapy: Iterable[bool]) -> bool:
    """Whether therapy is delivered at any cycle."""
    return any(therapy)


def baseline_reach(signals: Signals, domains: ParameterDomain) -> Tuple[bool, ...]:
    nominal = to_params(domains.nominal(), domains)
    return tuple(reachability(run(s, nominal)) for s in _signals(signals))


def flip_fraction(pairs: Sequence[Tuple[TherapySignal, TherapySignal]]) -> Fraction:
    """Effectiveness from ``(nominal, attacked)`` therapy signal pairs."""
    if not pairs:
        return Fraction(0)
    flipped = sum(reachability(before) != reachability(after) for before, after in pairs)
    return Fraction(flipped, len(pairs))


def effectiveness(
    v: ParamVector,
    signals: Signals,
    baseline: Sequence[bool],
    domains: ParameterDomain,
) -> Fraction:
    """
    Fraction of ``signals`` whose reachability under ``v`` differs from ``baseline``.

    This folds the reference simulator over every signal; synthesis goes
    through :class:`~icdsynth.evaluation.Evaluator` instead.
    """
    items = _signals(signals)
    if len(items) != len(baseline):
        raise ValueError(f"{len(baseline)} baseline values for {len(items)} signals")
    if not items:
        return Fraction(0)
    params = to_params(v, domains)
    flipped = sum(reachability(run(s, params)) != base for s, base in zip(items, baseline))
    return Fraction(flipped, len(items))


def dominates(a: Tuple[int, Fraction], b: Tuple[int, Fraction]) -> bool:
    """Whether ``a`` is at least as stealthy and as effective as ``b``, and strictly
    better in one of the two."""
    (sa, ea), (sb, eb) = a[:2], b[:2]
    return (ea > eb and sa <= sb) or (ea >= eb and sa < sb)


def pareto_filter(candidates: Iterable[Tuple[int, Fraction, ParamVector]]) -> ParetoFront:
    ordered = sorted(
        (ParetoPoint(int(s), Fraction(e), ParamVector(*w)) for s, e, w in candidates),
        key=lambda p: (p.distance, -p.effectiveness, tuple(p.witness)),
    )
    kept: List[ParetoPoint] = []
    for point in ordered:
        if not kept or point.effectiveness > kept[-1].effectiveness:
            kept.append(point)
    return ParetoFront(tuple(kept))


def evaluate_front(
    front: ParetoFront,
    signals: Signals,
    domains: ParameterDomain,
    evaluator: Optional[Evaluator] = None,
) -> List[Tuple[int, Fraction]]:
    """Effectiveness of every front witness on another signal set."""
    if evaluator is None:
        evaluator = Evaluator(_signals(signals), domains)
    return [(p.distance, evaluator.effectiveness(p.witness)) for p in front]


def validation_score(
    front: ParetoFront,
    train: Signals,
    test: Signals,
    domains: ParameterDomain,
) -> Fraction:
    """Mean change of effectiveness when moving the front witnesses from train to test."""
    if not len(front):
        return Fraction(0)
    on_train = evaluate_front(front, train, domains)
    on_test = evaluate_front(front, test, domains)
    total = sum((te - tr for (_, tr), (_, te) in zip(on_train, on_test)), Fraction(0))
    return total / len(front)


def auc(
    points: Iterable[Tuple[int, Fraction]],
    horizon: Union[int, ParameterDomain],
) -> Fraction:
    """
    Area under the step curve ``e(s) = max {e_p : d_p <= s}`` for ``s`` in
    ``[0, horizon]``.

    Works for fronts and for test-set series alike.

    :param horizon: ``dist_max`` or the domain it is computed from.
    """
    if isinstance(horizon, ParameterDomain):
        horizon = horizon.dist_max()
    pairs = sorted((int(p[0]), Fraction(p[1])) for p in points)

    area = Fraction(0)
    best = Fraction(0)
    i = 0
    for s in range(horizon):
        while i < len(pairs) and pairs[i][0] <= s:
            best = max(best, pairs[i][1])
            i += 1
        area += best
    return area


def distance_for_levels(
    front: ParetoFront,
    levels: Sequence[Fraction] = DEFAULT_LEVELS,
) -> Dict[Fraction, Optional[int]]:
    """Smallest front distance reaching each effectiveness level; ``None`` if unreached."""
    out = {}
    for level in levels:
        reached = [p.distance for p in front if p.effectiveness >= level]
        out[Fraction(level)] = min(reached) if reached else None
    return out


def front_statistics(
    front: ParetoFront,
    train: Signals,
    domains: ParameterDomain,
    test: Optional[Signals] = None,
    elapsed: Optional[float] = None,
) -> FrontStats:
    if not len(front):
        raise ValueError("statistics of an empty front")
    effs = [p.effectiveness for p in front]
    dists = [p.distance for p in front]
    lengths = [len(s) for s in _signals(train)] or [0]
    score = validation_score(front, train, test, domains) if test is not None else None
    return FrontStats(
        size=len(front),
        effectiveness_mean=sum(effs, Fraction(0)) / len(effs),
        effectiveness_min=min(effs),
        effectiveness_max=max(effs),
        distance_mean=Fraction(sum(dists), len(dists)),
        distance_min=min(dists),
        distance_max=max(dists),
        signal_length_mean=Fraction(sum(lengths), len(lengths)),
        signal_length_min=min(lengths),
        signal_length_max=max(lengths),
        validation_score=score,
        elapsed=elapsed,
    )