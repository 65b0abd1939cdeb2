"""
CSV and JSON artifacts written by the command line.

Everything that depends only on the inputs goes to ``front.csv`` and
``report.json``; run times go to a separate ``timing.json`` so re-running an
experiment reproduces the first two files byte for byte.
"""

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .discriminator import TherapySignal
from .errors import DomainError
from .objectives import FrontStats, ParetoFront, ParetoPoint, distance_for_levels
from .parameters import PARAMETER_NAMES, ParameterDomain, ParamVector, format_value
from .signals import FeatureSignal, atomic_write_text

__all__ = (
    "FRONT_COLUMNS",
    "format_fraction",
    "parse_fraction",
    "front_csv",
    "front_report",
    "write_json",
    "write_run",
    "load_front",
    "therapy_csv",
    "validation_csv",
)

FRONT_COLUMNS = ("distance", "effectiveness") + PARAMETER_NAMES

PathLike = Union[str, Path]


def format_fraction(value: Fraction) -> str:
    return f"{float(value):.6f}"


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise DomainError(f"{text!r} is not a fraction") from None


def _csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def front_csv(front: ParetoFront, domains: ParameterDomain) -> str:
    rows = []
    for point in front:
        values = domains.values_of(point.witness)
        rows.append(
            [point.distance, format_fraction(point.effectiveness)]
            + [format_value(values[name]) for name in PARAMETER_NAMES]
        )
    return _csv(FRONT_COLUMNS, rows)


def front_report(
    front: ParetoFront,
    domains: ParameterDomain,
    stats: Optional[FrontStats] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    levels = distance_for_levels(front)
    report: Dict[str, Any] = {
        "front": front.to_json(domains),
        "dist_max": domains.dist_max(),
        "distance_for_levels": {format_fraction(level): d for level, d in levels.items()},
    }
    if stats is not None:
        report["statistics"] = stats.to_json()
    if extra:
        report.update(extra)
    return report


def write_json(path: PathLike, document: Any) -> None:
    atomic_write_text(path, json.dumps(document, indent=2, sort_keys=True) + "\n")


def write_run(
    out: PathLike,
    front: ParetoFront,
    domains: ParameterDomain,
    report: Dict[str, Any],
    elapsed: float,
) -> List[Path]:
    out = Path(out)
    written = [out / "front.csv", out / "report.json", out / "timing.json"]
    atomic_write_text(written[0], front_csv(front, domains))
    write_json(written[1], report)
    write_json(written[2], {"elapsed_seconds": round(elapsed, 6)})
    return written


def load_front(path: PathLike, domains: ParameterDomain) -> ParetoFront:
    """Read the front of a ``report.json``; witnesses are checked against ``domains``."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DomainError(f"cannot read front {path}: {exc}") from exc
    entries = raw.get("front") if isinstance(raw, dict) else raw
    if not isinstance(entries, list):
        raise DomainError(f"{path}: no front list")

    points = []
    for entry in entries:
        try:
            witness = ParamVector(**{name: int(entry["witness"][name]) for name in PARAMETER_NAMES})
            point = ParetoPoint(int(entry["distance"]), parse_fraction(entry["effectiveness"]), witness)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"{path}: malformed front entry {entry!r}: {exc}") from None
        domains.check(point.witness)
        points.append(point)
    return ParetoFront(tuple(sorted(points, key=lambda p: p.distance)))


def therapy_csv(results: Iterable[Tuple[FeatureSignal, TherapySignal]]) -> str:
    rows = []
    for signal, therapy in results:
        first = next((k for k, bit in enumerate(therapy) if bit), "")
        rows.append(
            [
                signal.id,
                signal.label.value,
                int(any(therapy)),
                first,
                "".join("1" if bit else "0" for bit in therapy),
            ]
        )
    return _csv(("signal", "label", "reach", "first_therapy", "therapy"), rows)


def validation_csv(front: ParetoFront, test_series: Sequence[Tuple[int, Fraction]]) -> str:
    rows = [
        [point.distance, format_fraction(point.effectiveness), format_fraction(test), format_fraction(test - point.effectiveness)]
        for point, (_, test) in zip(front, test_series)
    ]
    return _csv(("distance", "train_effectiveness", "test_effectiveness", "delta"), rows)
