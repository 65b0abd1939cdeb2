import itertools

import numpy as np
import pytest

from conftest import DATA, make_signal, naive_run, random_signal
from icdsynth.discriminator import (
    INIT,
    AlgState,
    TherapySignal,
    d6,
    d7,
    format_trace,
    run,
    step,
    trace,
    vf_clk_over,
    vf_persist,
    vf_start,
    vt_start,
)
from icdsynth.parameters import ParamVector, to_params
from icdsynth.signals import Label, precompute


def test_golden_trace_at_240ms(domains, fast_signal):
    params = to_params(domains.nominal(), domains)
    records = trace(fast_signal, params)
    assert format_trace(records) == (DATA / "trace_vf_240.tsv").read_text()

    therapy = run(fast_signal, params)
    assert [k for k, bit in enumerate(therapy) if bit] == [14, 19]
    assert [r.state.t_vf for r in records[10:15]] == [0, 240, 480, 720, 960]


def test_predicates_are_false_before_a_full_window(domains, fast_signal):
    params = to_params(domains.nominal(), domains)
    for k in range(9):
        assert not vf_start(fast_signal, k, params)
        assert not vf_persist(fast_signal, k, params)
        assert not d6(fast_signal, k, params)
    assert vf_start(fast_signal, 9, params)
    assert vt_start(fast_signal, 9, params)


def test_start_needs_eight_of_ten(domains):
    params = to_params(domains.nominal(), domains)
    seven = make_signal([240] * 7 + [400] * 3)
    eight = make_signal([400] * 2 + [240] * 8)
    assert not vf_start(seven, 9, params)
    assert vf_start(eight, 9, params)


def test_persist_needs_the_current_interval_fast(domains):
    params = to_params(domains.nominal(), domains)
    assert vf_persist(make_signal([400] * 4 + [240] * 6), 9, params)
    assert not vf_persist(make_signal([240] * 9 + [400]), 9, params)
    assert not vf_persist(make_signal([400] * 5 + [240] * 5), 9, params)


def test_clock_comparison_is_inclusive(domains, fast_signal):
    params = to_params(domains.nominal(), domains)
    assert vf_clk_over(AlgState(True, False, 760, 0), fast_signal, 0, params)
    assert not vf_clk_over(AlgState(True, False, 759, 0), fast_signal, 0, params)


def test_rhythm_match_counts_three_high_scores(domains):
    params = to_params(domains.nominal(), domains)
    two = make_signal([400] * 10, fcc=[0.5] * 8 + [0.94, 0.97])
    three = make_signal([400] * 10, fcc=[0.5] * 7 + [0.94, 0.97, 0.95])
    assert not d6(two, 9, params)
    assert d6(three, 9, params)
    assert d6(three, 9, params, precompute(three))
    assert not d6(make_signal([400] * 10, fcc=[0.5] * 7 + [0.93] * 3), 9, params)


def test_afib_check_needs_ten_atrial_beats_and_a_stable_rhythm(domains):
    params = to_params(domains.nominal(), domains)
    stable = make_signal([400] * 10, aints=[200] * 20, atrial_count=[2 * (k + 1) for k in range(10)])
    assert d7(stable, precompute(stable), 9, params)
    assert not d7(stable, precompute(stable), 3, params)

    slow_atria = make_signal([400] * 10, aints=[400] * 20, atrial_count=[2 * (k + 1) for k in range(10)])
    assert not d7(slow_atria, precompute(slow_atria), 9, params)

    erratic = make_signal([300, 500] * 5, aints=[200] * 20, atrial_count=[2 * (k + 1) for k in range(10)])
    assert not d7(erratic, precompute(erratic), 9, params)


def test_step_returns_therapy_of_the_previous_state(domains, fast_signal):
    params = to_params(domains.nominal(), domains)
    derived = precompute(fast_signal)
    state, therapy = step(INIT, fast_signal, derived, 9, params)
    assert not therapy
    assert state == AlgState(True, True, 0, 0)


def test_svt_gate_withholds_vt_therapy(domains):
    params = to_params(domains.nominal(), domains)
    # 1:1 tracking at 330 ms with a strong template match: VT zone, no VF
    svt = make_signal([330] * 40, fcc=[0.97] * 40, label=Label.NO_THERAPY)
    assert not any(run(svt, params))
    # dissociated slow atria make it VT once VTdur elapses
    vt = make_signal([330] * 40, aints=[700] * 40, fcc=[0.97] * 40)
    assert any(run(vt, params))


def test_therapy_signal_literal():
    therapy = TherapySignal.from_string("0010")
    assert len(therapy) == 4
    assert list(therapy) == [False, False, True, False]
    assert therapy[2]


def random_vector(rng: np.random.Generator, domains) -> ParamVector:
    return ParamVector(*(int(rng.integers(1, n + 1)) for n in domains.sizes()))


@pytest.mark.parametrize("seed", range(4))
def test_run_agrees_with_naive_simulator(domains, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    signals = [random_signal(rng, i) for i in range(250)]
    vectors = [to_params(random_vector(rng, domains), domains) for _ in range(50)]
    mismatches = []
    for signal in signals:
        derived = precompute(signal)
        for params in vectors:
            if run(signal, params, derived) != naive_run(signal, params):
                mismatches.append((signal.id, params))
    assert not mismatches


def small_grid(domains):
    return [
        to_params(domains.vector(VF_th=vf, VT_th=vt, VFdur=vfdur, VTdur=vtdur), domains)
        for vf, vt, vfdur, vtdur in itertools.product((200, 250), (160, 140), ("1", "2"), ("1", "2.5"))
    ]


@pytest.mark.parametrize("length", range(1, 13))
def test_every_short_two_rate_signal_agrees_with_naive_simulator(domains, length):
    grid = small_grid(domains)
    mismatches = []
    for vints in itertools.product((240, 400), repeat=length):
        signal = make_signal(vints)
        derived = precompute(signal)
        for params in grid:
            if run(signal, params, derived) != naive_run(signal, params):
                mismatches.append((vints, params))
    assert not mismatches


def test_thresholds_at_the_shortest_interval_never_deliver_therapy(domains, vt_train):
    rng = np.random.Generator(np.random.PCG64(77))
    nominal = to_params(domains.nominal(), domains)
    signals = [random_signal(rng, i) for i in range(100)] + list(vt_train)
    for signal in signals:
        shortest = min(signal.vints)
        params = nominal._replace(vf_th_ms=shortest, vt_th_ms=shortest)
        assert not any(run(signal, params))


def test_therapy_has_one_decision_per_cycle(domains):
    rng = np.random.Generator(np.random.PCG64(78))
    params = to_params(domains.nominal(), domains)
    for signal in [random_signal(rng, i) for i in range(50)] + [make_signal([400])]:
        assert len(run(signal, params)) == len(signal)
        assert len(trace(signal, params)) == len(signal)
