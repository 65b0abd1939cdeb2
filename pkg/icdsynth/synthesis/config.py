"""
Control surface of a synthesis run.
"""

import dataclasses
import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from ..config import DEFAULT_ENUM_CAP
from ..errors import ConfigurationError
from ..objectives import ParetoFront
from ..parameters import PARAMETER_NAMES, ParameterDomain, ParamVector

__all__ = ("Backend", "SynthesisConfig", "LayerStats", "SynthesisRun", "parse_free_params")


class Backend(str, enum.Enum):
    EXACT = "exact"
    RANDOM = "random"
    SMT_EMIT = "smt"


def parse_free_params(text: Optional[str]) -> Tuple[str, ...]:
    """``"VF_th,VTdur"`` to a tuple in canonical order; empty or ``all`` means every parameter."""
    if text is None or not text.strip() or text.strip() == "all":
        return PARAMETER_NAMES
    names = {part.strip() for part in text.split(",") if part.strip()}
    unknown = names - set(PARAMETER_NAMES)
    if unknown:
        raise ConfigurationError(
            f"unknown parameters {', '.join(sorted(unknown))}; expected some of {', '.join(PARAMETER_NAMES)}"
        )
    return tuple(name for name in PARAMETER_NAMES if name in names)


@dataclass(frozen=True)
class SynthesisConfig:
    """
    :param budget: Evaluations for random search (the nominal point not counted).
    :param time_budget: Wall-clock seconds for random search; whichever budget
        runs out first ends the search.
    :param enum_cap: Largest grid the exact backend enumerates.
    """

    backend: Backend = Backend.EXACT
    free_params: Tuple[str, ...] = PARAMETER_NAMES
    max_distance: Optional[int] = None
    budget: Optional[int] = None
    time_budget: Optional[float] = None
    seed: Optional[int] = None
    enum_cap: int = DEFAULT_ENUM_CAP
    workers: int = 1
    solver_cmd: Optional[str] = None
    solver_timeout: Optional[float] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "backend", Backend(self.backend))
        except ValueError:
            choices = ", ".join(b.value for b in Backend)
            raise ConfigurationError(f"unknown backend {self.backend!r}; expected one of {choices}") from None
        free = self.free_params
        if isinstance(free, str):
            free = parse_free_params(free)
        object.__setattr__(self, "free_params", parse_free_params(",".join(free)) if free else ())

        if self.max_distance is not None and self.max_distance < 0:
            raise ConfigurationError("max_distance must be non-negative")
        if self.budget is not None and self.budget < 0:
            raise ConfigurationError("budget must be non-negative")
        if self.time_budget is not None and self.time_budget < 0:
            raise ConfigurationError("time_budget must be non-negative")
        if self.backend is Backend.RANDOM and self.seed is None:
            raise ConfigurationError("random search needs a seed")
        if self.seed is not None and not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")

    def replace(self, **changes) -> "SynthesisConfig":
        return dataclasses.replace(self, **changes)

    def horizon(self, domains: ParameterDomain) -> int:
        """Largest distance layer the run looks at."""
        top = domains.dist_max()
        return top if self.max_distance is None else min(self.max_distance, top)

    def index_ranges(self, domains: ParameterDomain) -> Dict[str, Tuple[int, int]]:
        """Box of the run: free parameters within the horizon, the rest nominal."""
        bounds = domains.box(self.horizon(domains))
        nominal = domains.nominal()
        ranges = {}
        for name in PARAMETER_NAMES:
            if name in self.free_params:
                ranges[name] = bounds[name]
            else:
                index = getattr(nominal, name)
                ranges[name] = (index, index)
        return ranges

    def to_json(self) -> Dict[str, Any]:
        return {
            "backend": self.backend.value,
            "free_params": list(self.free_params),
            "max_distance": self.max_distance,
            "budget": self.budget,
            "time_budget": self.time_budget,
            "seed": self.seed,
            "enum_cap": self.enum_cap,
        }

    @classmethod
    def from_json(cls, raw: Dict[str, Any], **overrides) -> "SynthesisConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigurationError(f"unknown synthesis settings: {', '.join(sorted(unknown))}")
        values = dict(raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        if isinstance(values.get("free_params"), list):
            values["free_params"] = tuple(values["free_params"])
        return cls(**values)


@dataclass(frozen=True)
class LayerStats:
    distance: int
    points: int
    best: Fraction
    witness: ParamVector


@dataclass(frozen=True)
class SynthesisRun:
    backend: Backend
    front: ParetoFront
    evaluations: int
    elapsed: float
    layers: Tuple[LayerStats, ...] = ()
    notes: Dict[str, Any] = field(default_factory=dict)

    def layers_json(self) -> List[Dict[str, Any]]:
        return [
            {
                "distance": layer.distance,
                "points": layer.points,
                "best": f"{layer.best.numerator}/{layer.best.denominator}",
                "witness": dict(layer.witness._asdict()),
            }
            for layer in self.layers
        ]
