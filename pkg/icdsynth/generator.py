"""
Seeded synthetic signals at the level of heart-cycle intervals.

Each :class:`ConditionSpec` is a recipe for one arrhythmia class. Signals
are drawn with :class:`numpy.random.Generator` over ``PCG64``; every signal
gets its own child of a :class:`numpy.random.SeedSequence`, so a set is
reproducible from ``(spec, n, seed)`` and train/test splits drawn from
different seeds never share a stream.
"""

import enum
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConditionSpecError
from .evaluation import Evaluator
from .parameters import ParameterDomain, expand_domains
from .signals import FeatureSignal, Label, SignalSet

__all__ = (
    "AtrialMode",
    "ConditionSpec",
    "generate",
    "generate_mixed",
    "builtin_conditions",
    "load_condition_spec",
    "resolve_condition",
    "MISCLASSIFICATION_LIMIT",
)

log = logging.getLogger(__name__)

BIT_GENERATOR = "PCG64"
MISCLASSIFICATION_LIMIT = 0.05
MAX_ATTEMPTS = 5

FCC_HIGH = (0.95, 0.99)
FCC_LOW = (0.2, 0.7)
ATRIAL_JITTER_MS = 10


class AtrialMode(str, enum.Enum):
    TRACKING = "TRACKING"  # 1:1, one atrial interval per ventricular one
    AFIB = "AFIB"  # fast irregular atria
    FLUTTER = "FLUTTER"  # 2:1
    DISSOCIATED = "DISSOCIATED"  # regular atria independent of the ventricles


@dataclass(frozen=True)
class ConditionSpec:
    name: str
    klass: Label
    vint_range: Tuple[int, int]
    vint_jitter: int
    a_to_v: AtrialMode
    aint_range: Tuple[int, int]
    fcc_high_prob: float
    duration_s: float = 30.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "klass", Label(self.klass))
            object.__setattr__(self, "a_to_v", AtrialMode(self.a_to_v))
        except ValueError as exc:
            raise ConditionSpecError(f"{self.name}: {exc}") from None
        object.__setattr__(self, "vint_range", tuple(int(x) for x in self.vint_range))
        object.__setattr__(self, "aint_range", tuple(int(x) for x in self.aint_range))

        for field_name in ("vint_range", "aint_range"):
            value = getattr(self, field_name)
            if len(value) != 2 or not 100 <= value[0] <= value[1]:
                raise ConditionSpecError(f"{self.name}: {field_name} {list(value)} must satisfy 100 <= lo <= hi")
        if self.vint_jitter < 0:
            raise ConditionSpecError(f"{self.name}: vint_jitter must be non-negative")
        if not 0.0 <= self.fcc_high_prob <= 1.0:
            raise ConditionSpecError(f"{self.name}: fcc_high_prob {self.fcc_high_prob} outside [0, 1]")
        if not self.duration_s > 0:
            raise ConditionSpecError(f"{self.name}: duration_s must be positive")

    @property
    def duration_ms(self) -> int:
        return int(round(self.duration_s * 1000))

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "class": self.klass.value,
            "vint_range": list(self.vint_range),
            "vint_jitter": self.vint_jitter,
            "a_to_v": self.a_to_v.value,
            "aint_range": list(self.aint_range),
            "fcc_high_prob": self.fcc_high_prob,
            "duration_s": self.duration_s,
        }

    @classmethod
    def from_json(cls, raw: Dict[str, Any]) -> "ConditionSpec":
        if not isinstance(raw, dict):
            raise ConditionSpecError("condition spec must be a JSON object")
        missing = [
            key
            for key in ("name", "class", "vint_range", "a_to_v", "fcc_high_prob")
            if key not in raw
        ]
        if missing:
            raise ConditionSpecError(f"condition spec is missing {', '.join(missing)}")
        try:
            return cls(
                name=str(raw["name"]),
                klass=raw["class"],
                vint_range=tuple(raw["vint_range"]),
                vint_jitter=int(raw.get("vint_jitter", 0)),
                a_to_v=raw["a_to_v"],
                aint_range=tuple(raw.get("aint_range", raw["vint_range"])),
                fcc_high_prob=float(raw["fcc_high_prob"]),
                duration_s=float(raw.get("duration_s", 30.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConditionSpecError(f"{raw.get('name')}: {exc}") from None


# Interval ranges are conventions chosen for each archetype.
BUILTIN = (
    ConditionSpec("fast-VF", Label.REQUIRES_THERAPY, (150, 240), 20, AtrialMode.DISSOCIATED, (700, 900), 0.05),
    ConditionSpec("monomorphic-VT", Label.REQUIRES_THERAPY, (240, 330), 15, AtrialMode.DISSOCIATED, (600, 900), 0.05),
    ConditionSpec("SVT-tracking", Label.NO_THERAPY, (280, 530), 20, AtrialMode.TRACKING, (280, 530), 0.9),
    ConditionSpec("AFib-conducted", Label.NO_THERAPY, (400, 600), 60, AtrialMode.AFIB, (150, 300), 0.3),
)


def builtin_conditions() -> List[ConditionSpec]:
    return list(BUILTIN)


def load_condition_spec(path: Union[str, Path]) -> ConditionSpec:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConditionSpecError(f"cannot read condition spec {path}: {exc}") from exc
    return ConditionSpec.from_json(raw)


def resolve_condition(ref: str) -> ConditionSpec:
    """A builtin archetype by name, or a spec file path."""
    for spec in BUILTIN:
        if spec.name == ref:
            return spec
    if Path(ref).is_file():
        return load_condition_spec(ref)
    names = ", ".join(spec.name for spec in BUILTIN)
    raise ConditionSpecError(f"{ref!r} is neither a builtin condition ({names}) nor a spec file")


def _ventricular(spec: ConditionSpec, rng: np.random.Generator) -> np.ndarray:
    lo, hi = spec.vint_range
    duration = spec.duration_ms
    cycles = math.ceil(duration / lo) + 1

    base = int(rng.integers(lo, hi + 1))
    jitter = rng.integers(-spec.vint_jitter, spec.vint_jitter + 1, size=cycles)
    vints = np.clip(base + jitter, lo, hi)
    # keep cycles up to and including the one that reaches the duration
    n = int(np.searchsorted(np.cumsum(vints), duration, side="left")) + 1
    return vints[:n]


def _atrial(spec: ConditionSpec, vints: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    n = len(vints)
    if spec.a_to_v is AtrialMode.TRACKING:
        return vints.copy(), np.arange(1, n + 1)
    if spec.a_to_v is AtrialMode.FLUTTER:
        first = vints // 2
        aints = np.stack([first, vints - first], axis=1).reshape(-1)
        return aints, 2 * np.arange(1, n + 1)

    lo, hi = spec.aint_range
    total = int(vints.sum())
    count = math.ceil(total / lo) + 1
    if spec.a_to_v is AtrialMode.AFIB:
        aints = rng.integers(lo, hi + 1, size=count)
    else:
        base = int(rng.integers(lo, hi + 1))
        aints = np.clip(base + rng.integers(-ATRIAL_JITTER_MS, ATRIAL_JITTER_MS + 1, size=count), lo, hi)

    a_times = np.cumsum(aints)
    aints = aints[: int(np.searchsorted(a_times, total, side="right"))]
    counts = np.searchsorted(a_times[: len(aints)], np.cumsum(vints), side="right")
    return aints, counts


def _fcc(spec: ConditionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    high = rng.random(n) < spec.fcc_high_prob
    scores = np.where(high, rng.uniform(*FCC_HIGH, size=n), rng.uniform(*FCC_LOW, size=n))
    return np.round(scores, 2)


def _signal(spec: ConditionSpec, sid: str, seed: np.random.SeedSequence) -> FeatureSignal:
    rng = np.random.Generator(np.random.PCG64(seed))
    vints = _ventricular(spec, rng)
    aints, counts = _atrial(spec, vints, rng)
    fcc = _fcc(spec, len(vints), rng)
    return FeatureSignal(
        id=sid,
        vints=[int(v) for v in vints],
        aints=[int(a) for a in aints],
        atrial_count=[int(c) for c in counts],
        fcc=[float(x) for x in fcc],
        label=spec.klass,
    )


def _misclassified(signals: Sequence[FeatureSignal], domains: ParameterDomain) -> float:
    baseline = Evaluator(signals, domains).baseline
    wrong = sum(reach != s.label.requires_therapy for s, reach in zip(signals, baseline))
    return wrong / len(signals)


def _calibrated(
    draw,
    label: str,
    n: int,
    root: np.random.SeedSequence,
    calibrate: bool,
    domains: Optional[ParameterDomain],
) -> Tuple[Tuple[FeatureSignal, ...], Dict[str, Any]]:
    domains = domains or expand_domains()
    rate = 0.0
    attempt = 0
    for attempt in range(1, MAX_ATTEMPTS + 1):
        signals = tuple(draw(root.spawn(n)))
        if not calibrate:
            return signals, {"checked": False}
        rate = _misclassified(signals, domains)
        if rate <= MISCLASSIFICATION_LIMIT:
            log.info("%s: %d signals, nominal misclassification %.3f (attempt %d)", label, n, rate, attempt)
            return signals, {"checked": True, "passed": True, "attempts": attempt, "misclassified": rate}
        log.warning(
            "%s: nominal misclassification %.3f above %.2f on attempt %d, regenerating",
            label,
            rate,
            MISCLASSIFICATION_LIMIT,
            attempt,
        )
    log.warning("%s: calibration still failing after %d attempts, keeping the last set", label, attempt)
    return signals, {"checked": True, "passed": False, "attempts": attempt, "misclassified": rate}


def generate(
    spec: ConditionSpec,
    n: int,
    seed: int,
    calibrate: bool = True,
    domains: Optional[ParameterDomain] = None,
) -> SignalSet:
    """
    Draw ``n`` signals of one condition.

    :param spec: The condition recipe.
    :param n: Number of signals, at least one.
    :param seed: Root seed; each signal uses its own spawned child.
    :param calibrate: Check the set against the nominal parameters and redraw
        (with fresh children of the same root) while more than 5% of the
        signals are misclassified.
    :param domains: Domains whose nominal vector is used for the check.
    """
    if n < 1:
        raise ConditionSpecError(f"need at least one signal, got n={n}")

    def draw(children):
        return (_signal(spec, f"{spec.name}-s{seed}-{i:03d}", child) for i, child in enumerate(children))

    signals, calibration = _calibrated(draw, spec.name, n, np.random.SeedSequence(seed), calibrate, domains)
    metadata = {
        "generator": BIT_GENERATOR,
        "seed": seed,
        "conditions": [spec.to_json()],
        "calibration": calibration,
    }
    return SignalSet(signals, metadata)


def generate_mixed(
    specs: Sequence[ConditionSpec],
    n: int,
    seed: int,
    calibrate: bool = True,
    domains: Optional[ParameterDomain] = None,
) -> SignalSet:
    """Condition-agnostic set: each signal's condition is drawn uniformly from ``specs``."""
    if not specs:
        raise ConditionSpecError("no conditions to mix")
    if n < 1:
        raise ConditionSpecError(f"need at least one signal, got n={n}")
    classes = {spec.klass for spec in specs}
    if len(classes) > 1:
        raise ConditionSpecError("cannot mix conditions that require therapy with ones that do not")

    root = np.random.SeedSequence(seed)
    chooser = np.random.Generator(np.random.PCG64(root.spawn(1)[0]))
    picks = chooser.integers(len(specs), size=n)

    def draw(children):
        for i, (pick, child) in enumerate(zip(picks, children)):
            spec = specs[int(pick)]
            yield _signal(spec, f"{spec.name}-s{seed}-{i:03d}", child)

    label = "+".join(spec.name for spec in specs)
    signals, calibration = _calibrated(draw, label, n, root, calibrate, domains)
    metadata = {
        "generator": BIT_GENERATOR,
        "seed": seed,
        "conditions": [spec.to_json() for spec in specs],
        "calibration": calibration,
    }
    return SignalSet(signals, metadata)
