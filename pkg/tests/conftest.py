from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pytest

from icdsynth.discriminator import AlgState, TherapySignal
from icdsynth.generator import generate, resolve_condition
from icdsynth.parameters import (
    ParameterDomain,
    ParameterList,
    Params,
    expand_domains,
)
from icdsynth.signals import WINDOW, FeatureSignal, Label

DATA = Path(__file__).parent / "data"


def make_signal(
    vints: Sequence[int],
    aints: Optional[Sequence[int]] = None,
    atrial_count: Optional[Sequence[int]] = None,
    fcc: Optional[Sequence[float]] = None,
    label: Label = Label.REQUIRES_THERAPY,
    sid: str = "s",
) -> FeatureSignal:
    """One atrial beat per ventricular beat unless told otherwise."""
    n = len(vints)
    return FeatureSignal(
        id=sid,
        vints=list(vints),
        aints=list(vints if aints is None else aints),
        atrial_count=list(range(1, n + 1) if atrial_count is None else atrial_count),
        fcc=list([0.5] * n if fcc is None else fcc),
        label=label,
    )


def random_signal(rng: np.random.Generator, index: int) -> FeatureSignal:
    """Short signal with arbitrary rhythms, atrial counts and two-decimal FCC scores."""
    n = int(rng.integers(12, 31))
    m = int(rng.integers(1, 41))
    counts = np.sort(rng.integers(0, m + 1, size=n))
    return FeatureSignal(
        id=f"r{index}",
        vints=[int(x) for x in rng.integers(150, 701, size=n)],
        aints=[int(x) for x in rng.integers(150, 901, size=m)],
        atrial_count=[int(c) for c in counts],
        fcc=[float(x) for x in np.round(rng.uniform(-1, 1, size=n), 2)],
        label=Label.REQUIRES_THERAPY,
    )


def truncated(domains: ParameterDomain, **radius: int) -> ParameterDomain:
    """Keep ``radius[name]`` values on each side of the nominal; unnamed lists keep only the nominal."""
    lists = {}
    for plist in domains:
        r = radius.get(plist.name, 0)
        lo, hi = plist.window(r)
        values = plist.values[lo - 1 : hi]
        lists[plist.name] = ParameterList(plist.name, plist.unit, values, plist.nominal_index - lo + 1)
    return ParameterDomain(lists, domains.rounding)


def naive_run(signal: FeatureSignal, p: Params) -> TherapySignal:
    """Straight transcription of the discriminator rules, independent of the package.

    FCC scores are expected to carry at most two decimals.
    """
    v, a, counts = signal.vints, signal.aints, signal.atrial_count
    n = len(v)
    bits = []
    state = AlgState()

    def fast(lo, hi, th):
        return len([x for x in v[lo:hi] if x < th])

    for k in range(n):
        full = k >= WINDOW - 1
        starts = {}
        persists = {}
        for name, th in (("vf", p.vf_th_ms), ("vt", p.vt_th_ms)):
            starts[name] = full and fast(k - 9, k + 1, th) >= 8
            persists[name] = full and fast(k - 9, k, th) >= 5 and v[k] < th

        vf_over = state.t_vf + v[k] >= p.vfdur_ms
        vt_over = state.t_vt + v[k] >= p.vtdur_ms

        window = v[max(0, k - 9) : k + 1]
        mean = Fraction(sum(window), len(window))
        variance = sum((x - mean) ** 2 for x in window) / len(window)
        kp = counts[k]
        if kp == 0:
            d5 = False
        else:
            a_window = a[max(0, kp - 10) : kp]
            d5 = 60000 * len(window) * sum(a_window) >= (60000 * len(a_window) + 10 * sum(a_window)) * sum(window)
        d6 = full and len([f for f in signal.fcc[k - 9 : k + 1] if round(f * 100) >= p.nsrcor_th]) >= 3
        d7 = (
            kp >= 10
            and len([x for x in a[kp - 10 : kp] if x < p.afib_th_ms]) >= 6
            and variance <= p.stb
        )

        vf = state.vfd and persists["vf"] and vf_over
        vt = state.vtd and persists["vt"] and vt_over
        bits.append(bool(vf or (vt and (d5 or not (d6 or d7)))))

        def advance(mode, clock, start, end):
            stays = mode and not end
            return (start and (not mode or end)) or stays, clock + v[k] if stays else 0

        vfd, t_vf = advance(state.vfd, state.t_vf, starts["vf"], vf_over or not persists["vf"])
        vtd, t_vt = advance(state.vtd, state.t_vt, starts["vt"], vt_over or not persists["vt"])
        state = AlgState(vfd, vtd, t_vf, t_vt)
    return TherapySignal(tuple(bits))


@pytest.fixture(scope="session")
def domains() -> ParameterDomain:
    return expand_domains()


@pytest.fixture(scope="session")
def small_domains(domains) -> ParameterDomain:
    return truncated(domains, VT_th=3, VTdur=3)


@pytest.fixture(scope="session")
def vt_train(domains):
    return generate(resolve_condition("monomorphic-VT"), 20, seed=11, domains=domains)


@pytest.fixture(scope="session")
def vt_test(domains):
    return generate(resolve_condition("monomorphic-VT"), 10, seed=12, domains=domains)


@pytest.fixture(scope="session")
def svt_train(domains):
    return generate(resolve_condition("SVT-tracking"), 20, seed=21, domains=domains)


@pytest.fixture
def fast_signal() -> FeatureSignal:
    return make_signal([240] * 20, sid="vf-240")



def brute_force_front(candidates):
    """Non-dominated ``(distance, effectiveness, witness)`` triples, smallest witness per distance."""
    best = {}
    for d, e, v in candidates:
        if d not in best or e > best[d][0] or (e == best[d][0] and v < best[d][1]):
            best[d] = (e, v)
    out = []
    for d, (e, v) in best.items():
        if not any((d2 <= d and e2 >= e) and (d2, e2) != (d, e) for d2, (e2, _) in best.items()):
            out.append((d, e, v))
    return sorted(out)
