"""
Fast evaluation of therapy reachability over many parameter vectors.

The VF and VT duration modes never influence each other, so reachability
splits into a VF branch that depends only on ``(VF_th, VFdur)`` and a VT
branch that depends on ``(VT_th, VTdur)`` and, through the SVT gate
``D5 or not (D6 or D7)``, on ``(AFib_th, NSRcor_th, stb)``. Each branch is
tabulated once per signal and the grid is filled by broadcasting, which
gives the same answer as folding :func:`icdsynth.discriminator.step` over
every grid point.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .discriminator import D6_COUNT, D7_COUNT, PERSIST_COUNT, START_COUNT
from .parameters import PARAMETER_NAMES, ParameterDomain, ParamVector, Params, to_params
from .signals import WINDOW, DerivedFeatures, FeatureSignal, SignalSet, precompute

__all__ = ("Evaluator", "IndexRanges")

log = logging.getLogger(__name__)

# name -> inclusive 1-based (lo, hi)
IndexRanges = Dict[str, Tuple[int, int]]


def _window_counts(mask: np.ndarray, width: int = WINDOW) -> np.ndarray:
    """Number of true entries in ``mask[k-width+1 .. k]``; zero before a full window."""
    prefix = np.concatenate(([0], np.cumsum(mask, dtype=np.int64)))
    out = np.zeros(len(mask), dtype=np.int64)
    if len(mask) >= width:
        out[width - 1 :] = prefix[width:] - prefix[:-width]
    return out


class SignalTables:
    """Per-signal predicate tables, filled lazily and keyed by encoded value."""

    def __init__(self, signal: FeatureSignal, derived: DerivedFeatures):
        self.signal = signal
        self.vints = np.asarray(signal.vints, dtype=np.int64)
        self.n = len(self.vints)
        self.full = np.arange(self.n) >= WINDOW - 1
        self.d5 = np.asarray(derived.d5, dtype=bool)
        self.fcc_centi = np.asarray(derived.fcc_centi, dtype=np.int64)
        self.vvar_ceil = np.asarray(derived.vvar_ceil, dtype=np.int64)

        counts = np.asarray(signal.atrial_count, dtype=np.int64)
        self._atrial_lo = np.maximum(counts - WINDOW, 0)
        self._atrial_hi = counts
        self._atrial_full = counts >= WINDOW
        self._aints = np.asarray(signal.aints, dtype=np.int64)
        self._vint_list = [int(v) for v in signal.vints]

        self._detect: Dict[int, Tuple[List[bool], List[bool]]] = {}
        self._fire: Dict[Tuple[int, int], np.ndarray] = {}
        self._rhythm_match: Dict[int, np.ndarray] = {}
        self._afib_rate: Dict[int, np.ndarray] = {}

    def detection(self, threshold_ms: int) -> Tuple[List[bool], List[bool]]:
        """Start and persist predicates for one rate threshold."""
        cached = self._detect.get(threshold_ms)
        if cached is None:
            fast = self.vints < threshold_ms
            counts = _window_counts(fast)
            start = self.full & (counts >= START_COUNT)
            persist = self.full & fast & (counts - fast >= PERSIST_COUNT)
            cached = self._detect[threshold_ms] = (start.tolist(), persist.tolist())
        return cached

    def fires(self, threshold_ms: int, duration_ms: int) -> np.ndarray:
        """Cycles where one duration mode has run its full duration while persisting."""
        key = (threshold_ms, duration_ms)
        cached = self._fire.get(key)
        if cached is not None:
            return cached

        start, persist = self.detection(threshold_ms)
        out = np.zeros(self.n, dtype=bool)
        mode = False
        clock = 0
        for k, vint in enumerate(self._vint_list):
            over = clock + vint >= duration_ms
            if mode and persist[k] and not over:
                clock += vint
                continue
            if mode and persist[k]:
                out[k] = True
            mode = start[k]
            clock = 0

        self._fire[key] = out
        return out

    def rhythm_match(self, nsrcor_th: int) -> np.ndarray:
        cached = self._rhythm_match.get(nsrcor_th)
        if cached is None:
            high = self.fcc_centi >= nsrcor_th
            cached = self._rhythm_match[nsrcor_th] = self.full & (_window_counts(high) >= D6_COUNT)
        return cached

    def afib_rate(self, afib_th_ms: int) -> np.ndarray:
        """AFib half of D7: at least 6 of the last 10 atrial intervals are fast."""
        cached = self._afib_rate.get(afib_th_ms)
        if cached is None:
            prefix = np.concatenate(([0], np.cumsum(self._aints < afib_th_ms, dtype=np.int64)))
            fast = prefix[self._atrial_hi] - prefix[self._atrial_lo]
            cached = self._afib_rate[afib_th_ms] = self._atrial_full & (fast >= D7_COUNT)
        return cached

    def gate(self, afib_th_ms: int, nsrcor_th: int, stb: int) -> np.ndarray:
        """Cycles where a VT-zone episode would be treated as VT."""
        d7 = self.afib_rate(afib_th_ms) & (self.vvar_ceil <= stb)
        return self.d5 | ~(self.rhythm_match(nsrcor_th) | d7)

    def gates(self, afib: Sequence[int], nsrcor: Sequence[int], stb: Sequence[int]) -> np.ndarray:
        """Gate vectors for a whole sub-grid, shape ``(C, F, G, N)``."""
        rate = np.stack([self.afib_rate(a) for a in afib])
        match = np.stack([self.rhythm_match(c) for c in nsrcor])
        stable = self.vvar_ceil[None, :] <= np.asarray(stb, dtype=np.int64)[:, None]
        d7 = rate[:, None, :] & stable[None, :, :]
        return self.d5 | ~(match[None, :, None, :] | d7[:, None, :, :])

    def reach(self, params: Params) -> bool:
        if self.fires(params.vf_th_ms, params.vfdur_ms).any():
            return True
        fire = self.fires(params.vt_th_ms, params.vtdur_ms)
        if not fire.any():
            return False
        return bool((fire & self.gate(params.afib_th_ms, params.nsrcor_th, params.stb)).any())

    def reach_grid(self, axes: Dict[str, List[int]]) -> np.ndarray:
        """Reachability over the product of ``axes`` (encoded values), in
        :data:`PARAMETER_NAMES` axis order."""
        vf = np.array(
            [[self.fires(th, dur).any() for dur in axes["VFdur"]] for th in axes["VF_th"]],
            dtype=bool,
        )
        fire = np.stack([self.fires(th, dur) for th in axes["VT_th"] for dur in axes["VTdur"]])
        gate = self.gates(axes["AFib_th"], axes["NSRcor_th"], axes["stb"])

        a, b, c, d, e, f, g = (len(axes[name]) for name in PARAMETER_NAMES)
        # counts of cycles where a running VT episode meets the gate; exact in float32
        hits = fire.astype(np.float32) @ gate.reshape(c * f * g, self.n).T.astype(np.float32)
        vt = (hits > 0).reshape(b, e, c, f, g).transpose(0, 2, 1, 3, 4).reshape(1, b, c, 1, e, f, g)
        return vf.reshape(a, 1, 1, d, 1, 1, 1) | vt


class Evaluator:
    """
    Effectiveness oracle for one training set.

    Single vectors go through a memoized scalar path; whole boxes go through
    :meth:`grid_counts`, which returns the number of flipped signals for every
    vector of the box at once.

    :param signals: The training signals.
    :param domains: The programmable parameter lists.
    :param workers: Threads used to tabulate signals in parallel.
    """

    def __init__(
        self,
        signals: Iterable[FeatureSignal],
        domains: ParameterDomain,
        workers: int = 1,
    ):
        if isinstance(signals, SignalSet):
            signals = signals.signals
        self.signals: Tuple[FeatureSignal, ...] = tuple(signals)
        self.domains = domains
        self.workers = max(1, int(workers))
        self.tables = [SignalTables(s, precompute(s)) for s in self.signals]

        self._counts: Dict[ParamVector, int] = {}
        self.hits = 0
        self.misses = 0

        nominal = to_params(domains.nominal(), domains)
        self.baseline: Tuple[bool, ...] = tuple(t.reach(nominal) for t in self.tables)

    def __len__(self) -> int:
        return len(self.signals)

    def reach_vector(self, v: ParamVector) -> Tuple[bool, ...]:
        params = to_params(v, self.domains)
        return tuple(t.reach(params) for t in self.tables)

    def flips(self, v: ParamVector) -> int:
        """Number of signals whose reachability differs from the nominal one."""
        cached = self._counts.get(v)
        if cached is not None:
            self.hits += 1
            return cached
        self.misses += 1
        count = sum(r != b for r, b in zip(self.reach_vector(v), self.baseline))
        self._counts[v] = count
        return count

    def effectiveness(self, v: ParamVector) -> Fraction:
        if not self.signals:
            return Fraction(0)
        return Fraction(self.flips(v), len(self.signals))

    def flips_many(self, vectors: Sequence[ParamVector]) -> List[int]:
        if self.workers == 1 or len(vectors) < 2:
            return [self.flips(v) for v in vectors]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(self.flips, vectors))

    def _axes(self, ranges: IndexRanges) -> Dict[str, List[int]]:
        return {
            name: [self.domains.encoded(name, i) for i in range(lo, hi + 1)]
            for name, (lo, hi) in ((n, ranges[n]) for n in PARAMETER_NAMES)
        }

    def grid_counts(self, ranges: IndexRanges) -> np.ndarray:
        """
        Flip counts over a box of index ranges.

        Entry ``[i1 - lo1, ..., i7 - lo7]`` of the returned array is
        ``flips(ParamVector(i1, ..., i7))``.

        :param ranges: Inclusive 1-based index range per parameter name.
        """
        axes = self._axes(ranges)
        shape = tuple(len(axes[name]) for name in PARAMETER_NAMES)
        counts = np.zeros(shape, dtype=np.int32)

        def flipped(index: int) -> np.ndarray:
            reach = self.tables[index].reach_grid(axes)
            return ~reach if self.baseline[index] else reach

        if self.workers == 1:
            for j in range(len(self.tables)):
                counts += np.broadcast_to(flipped(j), shape)
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                for result in pool.map(flipped, range(len(self.tables))):
                    counts += np.broadcast_to(result, shape)

        log.debug("tabulated %d grid points over %d signals", counts.size, len(self.tables))
        return counts

    def cache_info(self) -> Dict[str, int]:
        return {"hits": self.hits, "misses": self.misses, "size": len(self._counts)}
