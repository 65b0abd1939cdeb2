from fractions import Fraction

import numpy as np
import pytest

from conftest import brute_force_front, random_signal, truncated
from icdsynth.errors import ConfigurationError, GridTooLargeError
from icdsynth.evaluation import Evaluator
from icdsynth.generator import AtrialMode, ConditionSpec, builtin_conditions, generate
from icdsynth.objectives import (
    auc,
    baseline_reach,
    dominates,
    effectiveness,
    validation_score,
)
from icdsynth.parameters import PARAMETER_NAMES, distance
from icdsynth.signals import Label
from icdsynth.synthesis import (
    Backend,
    SynthesisConfig,
    compare_backends,
    exact_search,
    grid_size,
    parse_free_params,
    random_search,
    synthesize,
    synthesize_exact,
    synthesize_random,
    training_size_sweep,
)

VT_ATTACK = ("VF_th", "VT_th", "VFdur", "VTdur")


@pytest.fixture(scope="module")
def mixed_train(vt_train, svt_train):
    return list(vt_train)[:10] + list(svt_train)[:10]


def test_parse_free_params():
    assert parse_free_params("VTdur, VF_th") == ("VF_th", "VTdur")
    assert parse_free_params(None) == PARAMETER_NAMES
    with pytest.raises(ConfigurationError):
        parse_free_params("VF_th,HR")


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SynthesisConfig(backend="annealing")
    with pytest.raises(ConfigurationError):
        SynthesisConfig(backend=Backend.RANDOM)
    with pytest.raises(ConfigurationError):
        SynthesisConfig(max_distance=-1)
    config = SynthesisConfig.from_json({"backend": "random", "seed": 3, "free_params": ["VTdur"]}, budget=10)
    assert config.backend is Backend.RANDOM
    assert config.free_params == ("VTdur",)
    assert config.budget == 10


def test_index_ranges_pin_fixed_parameters(domains):
    config = SynthesisConfig(free_params=("VTdur",), max_distance=2)
    ranges = config.index_ranges(domains)
    nominal = domains.nominal()
    assert ranges["VTdur"] == (2, 6)
    assert ranges["VF_th"] == (nominal.VF_th, nominal.VF_th)
    assert grid_size(config, domains) == 5


def test_exact_refuses_huge_grids(domains):
    with pytest.raises(GridTooLargeError) as info:
        exact_search([], domains, SynthesisConfig(enum_cap=1000))
    assert info.value.cap == 1000


def test_exact_front_equals_brute_force(domains, mixed_train):
    small = truncated(domains, VT_th=3, VTdur=3, NSRcor_th=2)
    front = synthesize_exact(mixed_train, small)

    base = baseline_reach(mixed_train, small)
    candidates = [
        (distance(v, small), effectiveness(v, mixed_train, base, small), v)
        for v in small.iter_box(small.dist_max())
    ]
    assert [(p.distance, p.effectiveness, p.witness) for p in front] == brute_force_front(candidates)


@pytest.mark.parametrize("seed", range(50))
def test_fronts_are_staircases(domains, seed):
    rng = np.random.Generator(np.random.PCG64(1000 + seed))
    radius = {name: int(rng.integers(0, 3)) for name in PARAMETER_NAMES}
    small = truncated(domains, **radius)
    signals = [random_signal(rng, i) for i in range(8)]
    evaluator = Evaluator(signals, small)

    run = exact_search(signals, small, evaluator=evaluator)
    front = run.front
    assert front[0].distance == 0
    assert front[0].effectiveness == 0
    for p, q in zip(front, front[1:]):
        assert p.distance < q.distance
        assert p.effectiveness < q.effectiveness
    for p in front:
        assert distance(p.witness, small) == p.distance
        assert evaluator.effectiveness(p.witness) == p.effectiveness
        assert not any(dominates((q.distance, q.effectiveness), (p.distance, p.effectiveness)) for q in front)
    assert [layer.distance for layer in run.layers] == list(range(small.dist_max() + 1))


def test_max_distance_limits_the_front(domains, vt_train):
    config = SynthesisConfig(free_params=VT_ATTACK, max_distance=4)
    front = synthesize_exact(vt_train, domains, config)
    assert all(p.distance <= 4 for p in front)


def test_vt_attack_silences_every_training_signal(domains, vt_train):
    config = SynthesisConfig(free_params=VT_ATTACK)
    front = synthesize_exact(vt_train, domains, config)
    best = front.best()
    assert best.effectiveness == 1
    assert best.distance <= domains.dist_max()
    assert front.pairs()[0] == (0, 0)


def test_unattackable_condition_has_a_single_point(domains):
    # every interval stays VF-fast at the highest threshold and VFdur cannot outlast the signal
    spec = ConditionSpec("coarse-VF", Label.REQUIRES_THERAPY, (150, 220), 10, AtrialMode.DISSOCIATED, (700, 900), 0.05)
    train = generate(spec, 10, seed=31, domains=domains)
    test = generate(spec, 5, seed=32, domains=domains)
    front = synthesize_exact(train, domains, SynthesisConfig(free_params=VT_ATTACK))
    assert front.pairs() == [(0, 0)]
    assert validation_score(front, train, test, domains) == 0


@pytest.mark.parametrize("condition", builtin_conditions(), ids=lambda spec: spec.name)
def test_validation_score_on_an_unseen_set(domains, condition):
    train = generate(condition, 20, seed=11, domains=domains)
    test = generate(condition, 10, seed=12, domains=domains)
    front = synthesize_exact(train, domains, SynthesisConfig(free_params=VT_ATTACK))
    score = validation_score(front, train, test, domains)
    assert abs(score) <= Fraction(15, 100)


@pytest.mark.parametrize("seed", range(10))
def test_random_search_never_beats_exact(domains, seed):
    rng = np.random.Generator(np.random.PCG64(2000 + seed))
    small = truncated(domains, VF_th=2, VT_th=3, VFdur=2, VTdur=3)
    signals = [random_signal(rng, i) for i in range(10)]
    evaluator = Evaluator(signals, small)

    exact = exact_search(signals, small, evaluator=evaluator)
    rand = random_search(signals, small, SynthesisConfig(backend=Backend.RANDOM, seed=seed, budget=40), evaluator)
    assert auc(exact.front.pairs(), small) >= auc(rand.front.pairs(), small)
    assert rand.evaluations == 40


def test_random_search_is_reproducible(domains, vt_train):
    config = SynthesisConfig(backend=Backend.RANDOM, seed=5, budget=50, free_params=VT_ATTACK)
    first = synthesize_random(vt_train, domains, config)
    second = synthesize_random(vt_train, domains, config)
    assert first == second
    assert first[0].distance == 0


def test_random_search_time_budget(domains, vt_train):
    config = SynthesisConfig(backend=Backend.RANDOM, seed=5, time_budget=0.0, free_params=VT_ATTACK)
    run = random_search(vt_train, domains, config)
    assert run.evaluations == 0
    assert run.front.pairs() == [(0, 0)]


def test_synthesize_dispatches(domains, vt_train):
    config = SynthesisConfig(free_params=("VTdur",))
    assert synthesize(vt_train, domains, config).backend is Backend.EXACT
    config = config.replace(backend=Backend.RANDOM, seed=1, budget=5)
    assert synthesize(vt_train, domains, config).backend is Backend.RANDOM


def test_compare_backends(domains, vt_train, vt_test):
    config = SynthesisConfig(free_params=VT_ATTACK, seed=3, budget=100)
    comparison = compare_backends(vt_train, domains, config, vt_test)
    assert comparison.auc_train_exact >= comparison.auc_train_random
    assert comparison.auc_test_exact is not None
    raw = comparison.to_json()
    assert raw["random"]["evaluations"] == 100
    assert raw["exact"]["front_size"] == len(comparison.exact.front)


def test_compare_needs_a_seed(domains, vt_train):
    with pytest.raises(ConfigurationError):
        compare_backends(vt_train, domains, SynthesisConfig())


def test_training_size_sweep(domains, vt_train, vt_test):
    config = SynthesisConfig(free_params=("VF_th", "VTdur"))
    points = training_size_sweep(vt_train, vt_test, [5, 20, 10], domains, config)
    assert [p.size for p in points] == [5, 10, 20]
    assert points[-1].relative in (None, 1)
    with pytest.raises(ConfigurationError):
        training_size_sweep(vt_train, vt_test, [50], domains, config)
