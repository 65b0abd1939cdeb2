"""
The programmable parameter space of the discrimination algorithm.

Every parameter is an ascending list of programmable values. Attack
parameters are index vectors into those lists (1-based, so that the
distance and ladder formulas read exactly like their definitions), and the
stealthiness of an attack is the largest index deviation from the nominal
setting.
"""

import enum
import itertools
import json
import logging
import math
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from .errors import DomainError

__all__ = (
    "PARAMETER_NAMES",
    "Unit",
    "Rounding",
    "ParameterList",
    "ParameterDomain",
    "ParamVector",
    "Params",
    "expand_domains",
    "load_domains",
    "to_params",
    "distance",
    "dist_max",
    "box",
    "format_value",
    "parse_range",
)

log = logging.getLogger(__name__)

PARAMETER_NAMES = ("VF_th", "VT_th", "AFib_th", "VFdur", "VTdur", "NSRcor_th", "stb")


class Unit(str, enum.Enum):
    BPM = "BPM"
    SECONDS = "s"
    SCORE = "score"
    MS2 = "ms2"


class Rounding(str, enum.Enum):
    HALF_UP = "half_up"
    CEILING = "ceiling"


# name -> (unit, range expressions, nominal value)
TABLE = {
    "VF_th": (Unit.BPM, ("110:5:210", "220:10:250"), "200"),
    "VT_th": (Unit.BPM, ("90:5:210", "220"), "160"),
    "AFib_th": (Unit.BPM, ("100:10:300",), "170"),
    "VFdur": (Unit.SECONDS, ("1:0.5:5", "6:1:15"), "1"),
    "VTdur": (Unit.SECONDS, ("1:0.5:5", "6:1:15", "20:5:30"), "2.5"),
    "NSRcor_th": (Unit.SCORE, ("0.7:0.01:0.96",), "0.94"),
    "stb": (Unit.MS2, ("6:2:32", "35:5:60", "70:10:120"), "20"),
}


class ParamVector(NamedTuple):
    """1-based indices into each parameter's programmable list.

    Tuple ordering doubles as the lexicographic witness tie-break.
    """

    VF_th: int
    VT_th: int
    AFib_th: int
    VFdur: int
    VTdur: int
    NSRcor_th: int
    stb: int


class Params(NamedTuple):
    """Concrete parameters in the units the algorithm computes with.

    Thresholds are interval lengths in ms (a shorter interval is a faster
    rate), durations are ms, the Rhythm Match threshold is the score scaled by
    100 and the stability threshold is in ms².
    """

    vf_th_ms: int
    vt_th_ms: int
    vfdur_ms: int
    vtdur_ms: int
    nsrcor_th: int
    afib_th_ms: int
    stb: int


def _to_fraction(value: Union[str, int, float, Decimal, Fraction]) -> Fraction:
    if isinstance(value, float):
        value = repr(value)
    return Fraction(value)


def parse_range(expr: str) -> List[Fraction]:
    """Materialise ``n:k:m`` (n, n+k, ..., m) or a single value ``n``."""
    parts = [part.strip() for part in str(expr).split(":")]
    if len(parts) == 1:
        return [_to_fraction(parts[0])]
    if len(parts) != 3:
        raise DomainError(f"malformed range expression {expr!r}, expected n:k:m")

    start, step, stop = (_to_fraction(p) for p in parts)
    if step <= 0:
        raise DomainError(f"range {expr!r} has a non-positive step")

    values = []
    current = start
    while current <= stop:
        values.append(current)
        current += step
    return values


def format_value(value: Fraction) -> str:
    """Render a programmed value the way the device tables print it."""
    if value.denominator == 1:
        return str(value.numerator)
    text = format(Decimal(value.numerator) / Decimal(value.denominator), "f")
    return text.rstrip("0").rstrip(".") if "." in text else text


class ParameterList:
    """Ordered programmable values of one parameter."""

    __slots__ = ("name", "unit", "values", "nominal_index", "_index_of")

    def __init__(
        self,
        name: str,
        unit: Unit,
        values: Sequence[Fraction],
        nominal_index: int,
    ):
        values = tuple(values)
        if not values:
            raise DomainError(f"{name}: empty value list")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise DomainError(f"{name}: values must be strictly ascending")
        if not 1 <= nominal_index <= len(values):
            raise DomainError(f"{name}: nominal index {nominal_index} out of range 1..{len(values)}")
        if unit is Unit.BPM and values[0] <= 0:
            raise DomainError(f"{name}: rates must be positive")
        if unit is Unit.SCORE and any((v * 100).denominator != 1 for v in values):
            raise DomainError(f"{name}: scores must be multiples of 0.01")
        if unit is Unit.MS2 and any(v.denominator != 1 for v in values):
            raise DomainError(f"{name}: stability values must be whole ms²")

        self.name = name
        self.unit = unit
        self.values = values
        self.nominal_index = nominal_index
        self._index_of = {v: i for i, v in enumerate(values, start=1)}

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def nominal(self) -> Fraction:
        return self.values[self.nominal_index - 1]

    def value(self, index: int) -> Fraction:
        if not 1 <= index <= self.n:
            raise DomainError(f"{self.name}: index {index} out of range 1..{self.n}")
        return self.values[index - 1]

    def index(self, value) -> int:
        try:
            return self._index_of[_to_fraction(value)]
        except KeyError:
            raise DomainError(
                f"{self.name}: {value} is not a programmable value"
            ) from None

    def reach(self) -> int:
        return max(self.n - self.nominal_index, self.nominal_index - 1)

    def window(self, s: int) -> Tuple[int, int]:
        return max(self.nominal_index - s, 1), min(self.nominal_index + s, self.n)

    def __eq__(self, other):
        if not isinstance(other, ParameterList):
            return NotImplemented
        return (self.name, self.unit, self.values, self.nominal_index) == (
            other.name,
            other.unit,
            other.values,
            other.nominal_index,
        )

    def __hash__(self):
        return hash((self.name, self.values, self.nominal_index))

    def __repr__(self):
        return f"<ParameterList {self.name} n={self.n} nominal={format_value(self.nominal)}>"


class ParameterDomain:
    """All seven programmable lists plus the BPM to ms rounding rule."""

    __slots__ = ("lists", "rounding")

    def __init__(self, lists: Dict[str, ParameterList], rounding: Rounding = Rounding.HALF_UP):
        missing = [name for name in PARAMETER_NAMES if name not in lists]
        if missing:
            raise DomainError(f"missing parameters: {', '.join(missing)}")
        self.lists = {name: lists[name] for name in PARAMETER_NAMES}
        self.rounding = Rounding(rounding)

        for name, plist in self.lists.items():
            if plist.unit is Unit.BPM:
                converted = [self.bpm_to_ms(v) for v in plist.values]
                if len(set(converted)) != len(converted):
                    log.warning("%s: distinct rates collapse to the same interval after rounding", name)

    def __getitem__(self, name: str) -> ParameterList:
        try:
            return self.lists[name]
        except KeyError:
            raise DomainError(f"unknown parameter {name!r}") from None

    def __iter__(self) -> Iterator[ParameterList]:
        return iter(self.lists.values())

    def __eq__(self, other):
        if not isinstance(other, ParameterDomain):
            return NotImplemented
        return self.lists == other.lists and self.rounding == other.rounding

    def __hash__(self):
        return hash((tuple(self.lists.values()), self.rounding))

    def bpm_to_ms(self, bpm: Fraction) -> int:
        exact = Fraction(60000) / bpm
        if self.rounding is Rounding.CEILING:
            return math.ceil(exact)
        return math.floor(exact + Fraction(1, 2))

    def encoded(self, name: str, index: int) -> int:
        """Value of one parameter as the algorithm (and the encoding) sees it."""
        plist = self[name]
        value = plist.value(index)
        if plist.unit is Unit.BPM:
            return self.bpm_to_ms(value)
        if plist.unit is Unit.SECONDS:
            ms = value * 1000
            if ms.denominator != 1:
                raise DomainError(f"{name}: {format_value(value)} s is not a whole number of ms")
            return ms.numerator
        if plist.unit is Unit.SCORE:
            return (value * 100).numerator
        return value.numerator

    def nominal(self) -> ParamVector:
        return ParamVector(*(plist.nominal_index for plist in self))

    def sizes(self) -> Tuple[int, ...]:
        return tuple(plist.n for plist in self)

    def vector(self, **values) -> ParamVector:
        """Nominal vector with some parameters replaced by programmed values."""
        indices = self.nominal()._asdict()
        for name, value in values.items():
            indices[name] = self[name].index(value)
        return ParamVector(**indices)

    def values_of(self, v: ParamVector) -> Dict[str, Fraction]:
        return {name: self[name].value(index) for name, index in v._asdict().items()}

    def check(self, v: ParamVector) -> ParamVector:
        for name, index in v._asdict().items():
            self[name].value(index)
        return v

    def dist_max(self) -> int:
        return dist_max(self)

    def box(self, s: int) -> Dict[str, Tuple[int, int]]:
        return box(s, self)

    def iter_box(
        self,
        s: int,
        free: Optional[Iterable[str]] = None,
    ) -> Iterator[ParamVector]:
        """Every vector in ``box(s)`` whose non-free parameters stay nominal."""
        free = set(PARAMETER_NAMES if free is None else free)
        bounds = self.box(s)
        nominal = self.nominal()
        axes = []
        for name in PARAMETER_NAMES:
            if name in free:
                lo, hi = bounds[name]
                axes.append(range(lo, hi + 1))
            else:
                axes.append((getattr(nominal, name),))
        for indices in itertools.product(*axes):
            yield ParamVector(*indices)

    def to_json(self) -> dict:
        return {
            "rounding": self.rounding.value,
            "parameters": {
                plist.name: {
                    "unit": plist.unit.value,
                    "values": [format_value(v) for v in plist.values],
                    "nominal": format_value(plist.nominal),
                }
                for plist in self
            },
        }


def expand_domains(rounding: Union[Rounding, str] = Rounding.HALF_UP) -> ParameterDomain:
    """Materialise the full programmable lists of the device."""
    lists = {}
    for name, (unit, ranges, nominal) in TABLE.items():
        values = [v for expr in ranges for v in parse_range(expr)]
        plist = ParameterList(name, unit, values, 1)
        lists[name] = ParameterList(name, unit, values, plist.index(nominal))
    return ParameterDomain(lists, Rounding(rounding))


def load_domains(
    path: Union[str, Path],
    rounding: Optional[Union[Rounding, str]] = None,
) -> ParameterDomain:
    """Read a domain override file.

    The file maps parameter names to ``{"values": [...]}`` or
    ``{"ranges": ["n:k:m", ...]}`` plus an optional ``"nominal"``. Parameters
    that are not mentioned keep the device lists, so a file can truncate a
    few lists to a desk-scale grid.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"), parse_float=Decimal)
    except (OSError, ValueError) as exc:
        raise DomainError(f"cannot read domain file {path}: {exc}") from exc

    if not isinstance(raw, dict):
        raise DomainError(f"{path}: top level must be an object")

    params = raw.get("parameters", raw)
    defaults = expand_domains()
    lists = dict(defaults.lists)

    for name, entry in params.items():
        if name == "rounding":
            continue
        if name not in TABLE:
            raise DomainError(f"{path}: unknown parameter {name!r}")
        if not isinstance(entry, dict):
            raise DomainError(f"{path}: {name} must be an object")

        unit = TABLE[name][0]
        if "unit" in entry:
            try:
                declared = Unit(entry["unit"])
            except ValueError:
                raise DomainError(f"{path}: {name} has unknown unit {entry['unit']!r}") from None
            if declared is not unit:
                raise DomainError(f"{path}: {name} is programmed in {unit.value}, not {declared.value}")

        if "values" in entry:
            values = [_to_fraction(v) for v in entry["values"]]
        elif "ranges" in entry:
            values = [v for expr in entry["ranges"] for v in parse_range(expr)]
        else:
            raise DomainError(f"{path}: {name} needs 'values' or 'ranges'")

        nominal = _to_fraction(entry.get("nominal", TABLE[name][2]))
        lookup = ParameterList(name, unit, values, 1)
        try:
            nominal_index = lookup.index(nominal)
        except DomainError:
            raise DomainError(
                f"{path}: nominal {format_value(nominal)} of {name} is not in its value list"
            ) from None
        lists[name] = ParameterList(name, unit, values, nominal_index)

    mode = rounding if rounding is not None else raw.get("rounding", Rounding.HALF_UP)
    try:
        mode = Rounding(mode)
    except ValueError:
        raise DomainError(f"{path}: unknown rounding mode {mode!r}") from None
    return ParameterDomain(lists, mode)


def to_params(v: ParamVector, d: ParameterDomain) -> Params:
    d.check(v)
    return Params(
        vf_th_ms=d.encoded("VF_th", v.VF_th),
        vt_th_ms=d.encoded("VT_th", v.VT_th),
        vfdur_ms=d.encoded("VFdur", v.VFdur),
        vtdur_ms=d.encoded("VTdur", v.VTdur),
        nsrcor_th=d.encoded("NSRcor_th", v.NSRcor_th),
        afib_th_ms=d.encoded("AFib_th", v.AFib_th),
        stb=d.encoded("stb", v.stb),
    )


def distance(v: ParamVector, d: ParameterDomain) -> int:
    nominal = d.nominal()
    return max(abs(i - n) for i, n in zip(v, nominal))


def dist_max(d: ParameterDomain) -> int:
    return max(plist.reach() for plist in d)


def box(s: int, d: ParameterDomain) -> Dict[str, Tuple[int, int]]:
    """Clamped 1-based index interval of every parameter at distance ``s``."""
    if s < 0:
        raise DomainError(f"distance bound must be non-negative, got {s}")
    return {plist.name: plist.window(s) for plist in d}
