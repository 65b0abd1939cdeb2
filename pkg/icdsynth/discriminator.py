"""
Executable semantics of the two-zone Rhythm ID discrimination algorithm.

The algorithm runs once per ventricular event. Its state holds the VF and VT
duration modes and their clocks; ``step`` is the deterministic function
whose successor is the unique state satisfying the transition implications,
and ``run`` folds it over a signal to produce the therapy signal.
"""

from dataclasses import dataclass
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

from .parameters import Params
from .signals import WINDOW, DerivedFeatures, FeatureSignal, fcc_centi, precompute

__all__ = (
    "AlgState",
    "INIT",
    "TherapySignal",
    "TraceRecord",
    "vf_start",
    "vt_start",
    "vf_persist",
    "vt_persist",
    "vf_clk_over",
    "vt_clk_over",
    "d6",
    "d7",
    "therapy_predicate",
    "step",
    "run",
    "trace",
    "format_trace",
)

START_COUNT = 8
PERSIST_COUNT = 5
D6_COUNT = 3
D7_COUNT = 6


class AlgState(NamedTuple):
    vfd: bool = False
    vtd: bool = False
    t_vf: int = 0
    t_vt: int = 0


INIT = AlgState()


@dataclass(frozen=True)
class TherapySignal:
    bits: Tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[bool]:
        return iter(self.bits)

    def __getitem__(self, k):
        return self.bits[k]

    @classmethod
    def from_string(cls, text: str) -> "TherapySignal":
        """``"00100100"`` style literal, handy for hand-written examples."""
        return cls(tuple(ch == "1" for ch in text))


class TraceRecord(NamedTuple):
    k: int
    vint: int
    state: AlgState
    therapy: bool


def _fast_count(vints: Sequence[int], lo: int, hi: int, threshold_ms: int) -> int:
    return sum(1 for v in vints[lo:hi] if v < threshold_ms)


def _start(signal: FeatureSignal, k: int, threshold_ms: int) -> bool:
    if k < WINDOW - 1:
        return False
    return _fast_count(signal.vints, k - WINDOW + 1, k + 1, threshold_ms) >= START_COUNT


def _persist(signal: FeatureSignal, k: int, threshold_ms: int) -> bool:
    if k < WINDOW - 1:
        return False
    previous = _fast_count(signal.vints, k - WINDOW + 1, k, threshold_ms)
    return previous >= PERSIST_COUNT and signal.vints[k] < threshold_ms


def vf_start(signal: FeatureSignal, k: int, params: Params) -> bool:
    return _start(signal, k, params.vf_th_ms)


def vt_start(signal: FeatureSignal, k: int, params: Params) -> bool:
    return _start(signal, k, params.vt_th_ms)


def vf_persist(signal: FeatureSignal, k: int, params: Params) -> bool:
    return _persist(signal, k, params.vf_th_ms)


def vt_persist(signal: FeatureSignal, k: int, params: Params) -> bool:
    return _persist(signal, k, params.vt_th_ms)


def vf_clk_over(state: AlgState, signal: FeatureSignal, k: int, params: Params) -> bool:
    return state.t_vf + signal.vints[k] >= params.vfdur_ms


def vt_clk_over(state: AlgState, signal: FeatureSignal, k: int, params: Params) -> bool:
    return state.t_vt + signal.vints[k] >= params.vtdur_ms


def d6(
    signal: FeatureSignal,
    k: int,
    params: Params,
    derived: Optional[DerivedFeatures] = None,
) -> bool:
    """Rhythm Match: at least 3 of the last 10 FCC scores reach NSRcor_th."""
    if k < WINDOW - 1:
        return False
    if derived is not None:
        window = derived.fcc_centi[k - WINDOW + 1 : k + 1]
    else:
        window = [fcc_centi(x) for x in signal.fcc[k - WINDOW + 1 : k + 1]]
    return sum(1 for c in window if c >= params.nsrcor_th) >= D6_COUNT


def d7(signal: FeatureSignal, derived: DerivedFeatures, k: int, params: Params) -> bool:
    """AFib rate with a stable ventricular rhythm."""
    kp = signal.atrial_count[k]
    if kp < WINDOW:
        return False
    fast = sum(1 for a in signal.aints[kp - WINDOW : kp] if a < params.afib_th_ms)
    return fast >= D7_COUNT and derived.vvar_ceil[k] <= params.stb


def therapy_predicate(
    state: AlgState,
    signal: FeatureSignal,
    derived: DerivedFeatures,
    k: int,
    params: Params,
) -> bool:
    vf_branch = (
        state.vfd
        and vf_persist(signal, k, params)
        and vf_clk_over(state, signal, k, params)
    )
    if vf_branch:
        return True

    vt_branch = (
        state.vtd
        and vt_persist(signal, k, params)
        and vt_clk_over(state, signal, k, params)
    )
    if not vt_branch:
        return False
    return derived.d5[k] or not (d6(signal, k, params, derived) or d7(signal, derived, k, params))


def _advance(mode: bool, clock: int, start: bool, end: bool, vint: int) -> Tuple[bool, int]:
    stays = mode and not end
    new_mode = (start and (not mode or end)) or stays
    return new_mode, clock + vint if stays else 0


def step(
    state: AlgState,
    signal: FeatureSignal,
    derived: DerivedFeatures,
    k: int,
    params: Params,
) -> Tuple[AlgState, bool]:
    vint = signal.vints[k]
    therapy = therapy_predicate(state, signal, derived, k, params)

    vf_end = vf_clk_over(state, signal, k, params) or not vf_persist(signal, k, params)
    vt_end = vt_clk_over(state, signal, k, params) or not vt_persist(signal, k, params)

    vfd, t_vf = _advance(state.vfd, state.t_vf, vf_start(signal, k, params), vf_end, vint)
    vtd, t_vt = _advance(state.vtd, state.t_vt, vt_start(signal, k, params), vt_end, vint)
    return AlgState(vfd, vtd, t_vf, t_vt), therapy


def trace(
    signal: FeatureSignal,
    params: Params,
    derived: Optional[DerivedFeatures] = None,
) -> List[TraceRecord]:
    if derived is None:
        derived = precompute(signal)
    state = INIT
    records = []
    for k in range(len(signal)):
        successor, therapy = step(state, signal, derived, k, params)
        records.append(TraceRecord(k, signal.vints[k], state, therapy))
        state = successor
    return records


def run(
    signal: FeatureSignal,
    params: Params,
    derived: Optional[DerivedFeatures] = None,
) -> TherapySignal:
    return TherapySignal(tuple(record.therapy for record in trace(signal, params, derived)))


def format_trace(records: Sequence[TraceRecord]) -> str:
    """Tab-separated ``k vint VFd VTd tVF tVT Th`` lines, one per cycle."""
    lines = []
    for record in records:
        s = record.state
        fields = (record.k, record.vint, int(s.vfd), int(s.vtd), s.t_vf, s.t_vt, int(record.therapy))
        lines.append("\t".join(str(f) for f in fields))
    return "\n".join(lines) + "\n"
