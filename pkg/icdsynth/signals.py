"""
Feature-level cardiac signals and the parameter-independent pre-computations.

A signal carries, per heart cycle, the ventricular interval, the number of
atrial intervals seen so far and the Rhythm Match (FCC) score. Everything
the discriminators need that does not depend on a programmable parameter is
derived here once: the variance of the last ten ventricular intervals and
the V-rate versus A-rate comparison.
"""

import enum
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import SignalFormatError

__all__ = (
    "WINDOW",
    "Label",
    "FeatureSignal",
    "DerivedFeatures",
    "SignalSet",
    "compute_vvar",
    "compute_d5",
    "precompute",
    "fcc_centi",
    "load_signals",
    "save_signals",
    "atomic_write_text",
)

log = logging.getLogger(__name__)

WINDOW = 10
D5_MARGIN_BPM = 10


class Label(str, enum.Enum):
    REQUIRES_THERAPY = "VT"
    NO_THERAPY = "SVT"

    @property
    def requires_therapy(self) -> bool:
        return self is Label.REQUIRES_THERAPY


@dataclass(frozen=True)
class FeatureSignal:
    id: str
    vints: Tuple[int, ...]
    aints: Tuple[int, ...]
    atrial_count: Tuple[int, ...]
    fcc: Tuple[float, ...]
    label: Label

    def __post_init__(self):
        object.__setattr__(self, "vints", tuple(self.vints))
        object.__setattr__(self, "aints", tuple(self.aints))
        object.__setattr__(self, "atrial_count", tuple(self.atrial_count))
        object.__setattr__(self, "fcc", tuple(float(x) for x in self.fcc))
        object.__setattr__(self, "label", Label(self.label))
        self.validate()

    def __len__(self) -> int:
        return len(self.vints)

    @property
    def duration_ms(self) -> int:
        return sum(self.vints)

    def validate(self) -> None:
        sid = self.id
        n = len(self.vints)
        if n < 1:
            raise SignalFormatError(sid, "vints", "signal needs at least one heart cycle")
        for name in ("atrial_count", "fcc"):
            if len(getattr(self, name)) != n:
                raise SignalFormatError(
                    sid, name, f"length {len(getattr(self, name))} differs from {n} ventricular intervals"
                )

        for field_name in ("vints", "aints"):
            for k, value in enumerate(getattr(self, field_name)):
                if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                    raise SignalFormatError(sid, field_name, f"{value!r} is not an integer ms value", k)
                if value <= 0:
                    raise SignalFormatError(sid, field_name, f"interval {value} ms must be positive", k)

        previous = 0
        for k, count in enumerate(self.atrial_count):
            if isinstance(count, bool) or not isinstance(count, (int, np.integer)) or count < 0:
                raise SignalFormatError(sid, "atrial_count", f"{count!r} is not a non-negative integer", k)
            if count < previous:
                raise SignalFormatError(sid, "atrial_count", "counts must be non-decreasing", k)
            if count > len(self.aints):
                raise SignalFormatError(
                    sid, "atrial_count", f"{count} exceeds the {len(self.aints)} atrial intervals", k
                )
            previous = count

        for k, score in enumerate(self.fcc):
            if not math.isfinite(score):
                raise SignalFormatError(sid, "fcc", "NaN/Inf is not allowed", k)
            if not -1.0 <= score <= 1.0:
                raise SignalFormatError(sid, "fcc", f"{score} outside [-1, 1]", k)

    def to_json(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "label": self.label.value,
            "vints": [int(v) for v in self.vints],
            "aints": [int(a) for a in self.aints],
            "atrial_count": [int(c) for c in self.atrial_count],
            "fcc": list(self.fcc),
        }

    @classmethod
    def from_json(cls, raw: Dict[str, Any]) -> "FeatureSignal":
        sid = raw.get("id") if isinstance(raw, dict) else None
        if not isinstance(raw, dict):
            raise SignalFormatError(None, "signals", f"entry {raw!r} is not an object")
        for name in ("id", "label", "vints", "aints", "atrial_count", "fcc"):
            if name not in raw:
                raise SignalFormatError(sid, name, "missing")
        for name in ("vints", "aints", "atrial_count", "fcc"):
            if not isinstance(raw[name], list):
                raise SignalFormatError(sid, name, "must be a list")
        try:
            label = Label(raw["label"])
        except ValueError:
            raise SignalFormatError(sid, "label", f"{raw['label']!r} is not 'VT' or 'SVT'") from None
        for k, score in enumerate(raw["fcc"]):
            if isinstance(score, bool) or not isinstance(score, (int, float)):
                raise SignalFormatError(sid, "fcc", f"{score!r} is not a number", k)
        return cls(
            id=str(raw["id"]),
            vints=raw["vints"],
            aints=raw["aints"],
            atrial_count=raw["atrial_count"],
            fcc=raw["fcc"],
            label=label,
        )


@dataclass(frozen=True)
class DerivedFeatures:
    """Per-cycle pre-computations; ``vvar_ceil`` and ``fcc_centi`` are the
    integer forms the discriminators and the encoding compare against the
    (integer) stability and Rhythm Match thresholds."""

    vvar: Tuple[float, ...]
    d5: Tuple[bool, ...]
    vvar_ceil: Tuple[int, ...] = field(repr=False)
    fcc_centi: Tuple[int, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.vvar)


@dataclass(frozen=True)
class SignalSet:
    signals: Tuple[FeatureSignal, ...]
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __iter__(self) -> Iterator[FeatureSignal]:
        return iter(self.signals)

    def __len__(self) -> int:
        return len(self.signals)

    def __getitem__(self, item):
        return self.signals[item]


def _check_k(vints: Sequence[int], k: int) -> None:
    if not 0 <= k < len(vints):
        raise IndexError(f"cycle index {k} out of range 0..{len(vints) - 1}")


def _window_variance(window: Sequence[int]) -> Fraction:
    n = len(window)
    total = sum(window)
    squares = sum(x * x for x in window)
    return Fraction(n * squares - total * total, n * n)


def compute_vvar(vints: Sequence[int], k: int) -> float:
    """Population variance of the last ten ventricular intervals ending at ``k``."""
    _check_k(vints, k)
    return float(_window_variance(vints[max(0, k - WINDOW + 1) : k + 1]))


def compute_d5(
    vints: Sequence[int],
    aints: Sequence[int],
    atrial_count: Sequence[int],
    k: int,
) -> bool:
    """Average V rate at least 10 BPM faster than the average A rate."""
    _check_k(vints, k)
    kp = atrial_count[k]
    if kp == 0:
        return False

    v_window = vints[max(0, k - WINDOW + 1) : k + 1]
    a_window = aints[max(0, kp - WINDOW) : kp]
    v_rate = Fraction(60000 * len(v_window), sum(v_window))
    a_rate = Fraction(60000 * len(a_window), sum(a_window))
    return v_rate >= a_rate + D5_MARGIN_BPM


def fcc_centi(score: float) -> int:
    """Largest integer c with ``score >= c / 100``, read from the decimal form."""
    return math.floor(Fraction(repr(float(score))) * 100)


def precompute(signal: FeatureSignal) -> DerivedFeatures:
    vints = np.asarray(signal.vints, dtype=np.int64)
    n = len(vints)

    # warm-up cycles use the available prefix, later cycles a full window
    padded = np.concatenate([np.zeros(WINDOW - 1, dtype=np.int64), vints])
    windows = sliding_window_view(padded, WINDOW)
    sizes = np.minimum(np.arange(1, n + 1), WINDOW)
    sums = windows.sum(axis=1)
    squares = (windows * windows).sum(axis=1)

    exact = [
        Fraction(int(size * sq - s * s), int(size * size))
        for size, s, sq in zip(sizes, sums, squares)
    ]
    vvar = tuple(float(x) for x in exact)
    vvar_ceil = tuple(math.ceil(x) for x in exact)
    d5 = tuple(
        compute_d5(signal.vints, signal.aints, signal.atrial_count, k) for k in range(n)
    )
    return DerivedFeatures(
        vvar=vvar,
        d5=d5,
        vvar_ceil=vvar_ceil,
        fcc_centi=tuple(fcc_centi(x) for x in signal.fcc),
    )


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_signals(path: Union[str, Path]) -> SignalSet:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SignalFormatError(None, "file", f"cannot read {path}: {exc}") from exc

    def reject_constant(token):
        raise SignalFormatError(None, "fcc", f"{token} is not allowed")

    try:
        raw = json.loads(text, parse_constant=reject_constant)
    except json.JSONDecodeError as exc:
        raise SignalFormatError(None, "json", f"line {exc.lineno}: {exc.msg}") from exc

    if not isinstance(raw, dict) or not isinstance(raw.get("signals"), list):
        raise SignalFormatError(None, "signals", "top level must be an object with a 'signals' list")

    signals = tuple(FeatureSignal.from_json(entry) for entry in raw["signals"])
    ids = [s.id for s in signals]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if duplicates:
        raise SignalFormatError(duplicates[0], "id", "duplicate signal id")

    log.debug("loaded %d signals from %s", len(signals), path)
    return SignalSet(signals, dict(raw.get("metadata") or {}))


def save_signals(
    signals: Union[SignalSet, Iterable[FeatureSignal]],
    path: Union[str, Path],
    metadata: Optional[Dict[str, Any]] = None,
) -> None:
    if isinstance(signals, SignalSet):
        meta = dict(signals.metadata)
        items = signals.signals
    else:
        meta = {}
        items = tuple(signals)
    if metadata:
        meta.update(metadata)

    document: Dict[str, Any] = {"signals": [s.to_json() for s in items]}
    if meta:
        document["metadata"] = meta
    atomic_write_text(path, json.dumps(document, indent=1, sort_keys=True, allow_nan=False) + "\n")
