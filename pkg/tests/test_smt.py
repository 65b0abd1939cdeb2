import logging
import os
import shutil
from fractions import Fraction

import numpy as np
import pytest

from conftest import make_signal, random_signal, truncated
from icdsynth.discriminator import run
from icdsynth.errors import (
    DecodeError,
    DomainError,
    EncodingMismatch,
    SolverExitError,
    SolverNotFound,
    SolverTimeout,
)
from icdsynth.evaluation import Evaluator
from icdsynth.parameters import ParamVector, to_params
from icdsynth.signals import Label
from icdsynth.smt import (
    EmitMode,
    Scope,
    SmtEncoder,
    build_command,
    check_pinned,
    clean_text,
    decode_model,
    emit_smt,
    parse_value,
    read_blocks,
    run_external_solver,
    solve_front,
)
from icdsynth.synthesis import Backend, SynthesisConfig


@pytest.fixture
def pair(fast_signal):
    return [fast_signal, make_signal([600] * 30, sid="slow", label=Label.NO_THERAPY)]


@pytest.fixture
def pair_encoder(domains, pair):
    return SmtEncoder(pair, domains, free_params=("VTdur",))


def model_text(domains, v, effective=None, status="sat", objectives=None):
    lines = [status]
    if objectives:
        lines.append("(objectives")
        lines.extend(f" ({key} {value})" for key, value in objectives.items())
        lines.append(")")
    lines.append("(model")
    for name, index in v._asdict().items():
        lines.append(f"  (define-fun {name} () Int {domains.encoded(name, index)})")
    for j, bit in enumerate(effective or ()):
        lines.append(f"  (define-fun effective_{j} () Bool {'true' if bit else 'false'})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def test_document_text(pair_encoder, domains):
    doc = pair_encoder.document()
    assert doc.text.startswith("; icdsynth ")
    assert "(set-option :opt.priority pareto)" in doc.text
    assert "(declare-fun dist () Int)" in doc.text
    assert "(declare-fun Th_1_29 () Bool)" in doc.text
    assert "(assert-soft effective_0 :weight 1 :id eff)" in doc.text
    assert "(assert-soft effective_1 :weight 1 :id eff)" in doc.text
    assert "(=> (<= dist 0) " in doc.text
    assert f"(=> (<= dist {domains.dist_max()}) " in doc.text
    assert doc.text.rstrip().endswith("(check-sat)\n(get-objectives)\n(get-model)")
    assert "(minimize dist)" in doc.text


@pytest.mark.parametrize("s, lo, hi", [(0, 2500, 2500), (1, 2000, 3000), (2, 1500, 3500)])
def test_distance_ladder_bounds(pair_encoder, s, lo, hi):
    ladder = [line for line in pair_encoder.document().text.splitlines() if f"(=> (<= dist {s}) " in line]
    assert len(ladder) == 1
    assert f"(<= {lo} VTdur) (<= VTdur {hi})" in ladder[0]


def test_max_eff_at_dist_document(pair_encoder):
    doc = pair_encoder.document(EmitMode.MAX_EFF_AT_DIST, bound=3)
    assert "(assert (<= dist 3))" in doc.text
    assert "(minimize dist)" not in doc.text
    assert "(set-option :opt.priority pareto)" not in doc.text
    assert doc.metadata.bound == 3
    assert doc.metadata.mode is EmitMode.MAX_EFF_AT_DIST
    with pytest.raises(ValueError):
        pair_encoder.document(EmitMode.MAX_EFF_AT_DIST)


def test_metadata(pair_encoder):
    meta = pair_encoder.metadata(EmitMode.PARETO, None)
    assert meta.signal_ids == ("vf-240", "slow")
    assert meta.baseline == (True, False)
    assert meta.effective == ("effective_0", "effective_1")
    assert len(meta.therapy[0]) == 20
    assert meta.free_params == ("VTdur",)
    raw = meta.to_json()
    assert raw["signals"][1]["state"]["tVT"] == "tVT_1_<k>"
    assert raw["mode"] == "pareto"


def test_encoder_rejects_bad_inputs(domains, pair):
    with pytest.raises(DomainError):
        SmtEncoder(pair, domains, free_params=("VF_th", "HR"))
    with pytest.raises(ValueError):
        SmtEncoder(pair, domains, baseline=[True])


def test_emitting_twice_gives_the_same_text(domains, pair):
    assert emit_smt(pair, domains).text == emit_smt(pair, domains).text


def test_pinned_document_agrees_with_the_simulator_on_a_grid(domains):
    rng = np.random.Generator(np.random.PCG64(42))
    signals = [random_signal(rng, i) for i in range(5)]
    small = truncated(domains, VF_th=2, VTdur=2)
    doc = SmtEncoder(signals, small, free_params=("VF_th", "VTdur")).document()
    baseline = Evaluator(signals, small).baseline

    for v in small.iter_box(small.dist_max()):
        params = to_params(v, small)
        check = check_pinned(doc, v, small)
        assert check.therapy == tuple(run(s, params) for s in signals)
        assert check.effective == tuple(any(t) != b for t, b in zip(check.therapy, baseline))


@pytest.mark.parametrize("seed", range(3))
def test_pinned_document_agrees_with_the_simulator_anywhere(domains, seed):
    rng = np.random.Generator(np.random.PCG64(300 + seed))
    signals = [random_signal(rng, i) for i in range(4)]
    doc = emit_smt(signals, domains)
    for _ in range(15):
        v = ParamVector(*(int(rng.integers(1, n + 1)) for n in domains.sizes()))
        params = to_params(v, domains)
        assert check_pinned(doc, v, domains).therapy == tuple(run(s, params) for s in signals)


def test_pins_and_bounds_are_enforced(domains, pair_encoder):
    v = domains.vector(VTdur="4.5")
    pinned = pair_encoder.document(pin=v)
    check_pinned(pinned, v, domains)
    with pytest.raises(EncodingMismatch):
        check_pinned(pinned, domains.nominal(), domains)

    bounded = pair_encoder.document(EmitMode.MAX_EFF_AT_DIST, bound=3)
    with pytest.raises(EncodingMismatch):
        check_pinned(bounded, v, domains)


def test_decode_a_model(domains, pair_encoder):
    meta = pair_encoder.metadata(EmitMode.MAX_EFF_AT_DIST, 4)
    v = domains.vector(VTdur="4.5")
    text = model_text(domains, v, effective=(False, True), objectives={"eff": 1})
    model = decode_model(text, domains, meta)
    assert model.vector == v
    assert model.effective_count == 1
    assert model.status == "sat"
    assert model.objectives == {"eff": 1}
    assert model.dist is None


def test_decode_falls_back_to_the_soft_objective(domains, pair_encoder):
    meta = pair_encoder.metadata(EmitMode.PARETO, None)
    text = model_text(domains, domains.nominal(), objectives={"dist": 0, "eff": 2})
    assert decode_model(text, domains, meta).effective_count == 0
    with pytest.raises(DecodeError):
        decode_model(model_text(domains, domains.nominal()), domains, meta)


def test_decode_unsat_and_missing_answers(domains, pair_encoder):
    meta = pair_encoder.metadata(EmitMode.PARETO, None)
    with pytest.raises(DecodeError) as info:
        decode_model("unsat\n", domains, meta)
    assert info.value.line == 1
    with pytest.raises(DecodeError):
        decode_model("(model)\n", domains, meta)
    with pytest.raises(DecodeError):
        decode_model('sat\n(error "line 3 column 4: unknown constant")\n', domains, meta)


def test_decode_unknown_is_a_warning(domains, pair_encoder, caplog):
    meta = pair_encoder.metadata(EmitMode.PARETO, None)
    text = model_text(domains, domains.nominal(), effective=(False, False), status="unknown")
    with caplog.at_level(logging.WARNING, logger="icdsynth.smt.decode"):
        model = decode_model(text, domains, meta)
    assert model.status == "unknown"
    assert "unknown" in caplog.text


def test_decode_refuses_values_off_the_grid(domains, pair_encoder):
    meta = pair_encoder.metadata(EmitMode.PARETO, None)
    text = model_text(domains, domains.nominal(), effective=(False, False)).replace(
        "(define-fun VF_th () Int 300)", "(define-fun VF_th () Int 301)"
    )
    with pytest.raises(DecodeError):
        decode_model(text, domains, meta)


def test_parse_value():
    assert parse_value("true") is True
    assert parse_value("42") == 42
    assert parse_value(["-", "42"]) == -42
    assert parse_value(["/", "1", "2"]) == Fraction(1, 2)
    assert parse_value("3.0") == 3
    with pytest.raises(DecodeError):
        parse_value("abc")
    with pytest.raises(DecodeError):
        parse_value(["/", "1", "0"])


def test_read_blocks():
    text = "sat\n; a comment (ignored\n(model\n  (define-fun |odd name| () Int 1))\n"
    blocks = read_blocks(text)
    assert [b.line for b in blocks] == [1, 3]
    assert blocks[0].content == "sat"
    assert blocks[1].content == ["model", ["define-fun", "odd name", [], "Int", "1"]]
    assert blocks[1].text.startswith("(model")
    assert blocks[1].text.endswith("1))")


def test_read_blocks_rejects_unbalanced_text():
    with pytest.raises(DecodeError):
        read_blocks("sat\n)\n")
    with pytest.raises(DecodeError) as info:
        read_blocks("sat\n(model\n  (define-fun x () Int 1)\n")
    assert info.value.line == 2


def test_scope():
    scope = Scope({"VF_th": 300})
    assert "VF_th" in scope
    assert scope.assign("VFd_0_1", True) is True
    assert scope.assign("VFd_0_1", True) is True
    with pytest.raises(ValueError):
        scope.assign("VFd_0_1", False)
    with pytest.raises(ValueError):
        scope.assign("VF_th", 240)

    scope.update_locals({"VF_th": 240})
    assert scope["VF_th"] == 240
    scope.clear_locals()
    assert scope["VF_th"] == 300
    assert "VFd_0_1" not in scope
    with pytest.raises(KeyError):
        scope["VFd_0_1"]


def test_build_command():
    assert build_command("z3 {file}", "/tmp/q.smt2") == ["z3", "/tmp/q.smt2"]
    assert build_command("optimathsat -optimization=true", "q.smt2") == [
        "optimathsat",
        "-optimization=true",
        "q.smt2",
    ]
    assert build_command("sh -c 'cat \"$0\"' {file}", "q.smt2") == ["sh", "-c", 'cat "$0"', "q.smt2"]
    with pytest.raises(SolverNotFound):
        build_command("  ", "q.smt2")


def test_clean_text():
    assert clean_text(b"\x1b[31msat\x1b[0m\r\n") == "sat\n"


def test_external_solver_receives_the_document(pair_encoder):
    doc = pair_encoder.document(EmitMode.MAX_EFF_AT_DIST, bound=2)
    assert run_external_solver("cat {file}", doc, timeout=30) == doc.text


def test_external_solver_timeout(pair_encoder):
    doc = pair_encoder.document()
    with pytest.raises(SolverTimeout) as info:
        run_external_solver("sh -c 'sleep 5' {file}", doc, timeout=0.2)
    assert info.value.exit_code == 3


def test_external_solver_failures(pair_encoder):
    doc = pair_encoder.document()
    with pytest.raises(SolverExitError) as info:
        run_external_solver("sh -c 'echo broken >&2; exit 4' {file}", doc, timeout=30)
    assert info.value.returncode == 4
    assert "broken" in info.value.stderr
    with pytest.raises(SolverNotFound):
        run_external_solver("icdsynth-no-such-solver {file}", doc, timeout=30)


def test_solve_front_with_a_canned_solver(domains, pair, tmp_path):
    answer = tmp_path / "answer.txt"
    answer.write_text(model_text(domains, domains.nominal(), effective=(False, False)))
    config = SynthesisConfig(backend=Backend.SMT_EMIT, free_params=("VTdur",), max_distance=1)

    result = solve_front(pair, domains, config, solver_cmd=f"sh -c 'cat {answer}' {{file}}")
    assert result.backend is Backend.SMT_EMIT
    assert result.front.pairs() == [(0, 0)]
    assert result.evaluations == 2

    answer.write_text(model_text(domains, domains.nominal(), effective=(True, False)))
    with pytest.raises(EncodingMismatch):
        solve_front(pair, domains, config, solver_cmd=f"sh -c 'cat {answer}' {{file}}")


SOLVER = os.getenv("ICD_SMT_SOLVER")


@pytest.mark.skipif(
    not SOLVER or shutil.which(SOLVER.split()[0]) is None,
    reason="set ICD_SMT_SOLVER to an installed MaxSMT solver",
)
def test_real_solver_matches_exact_search(domains, vt_train):
    from icdsynth.synthesis import synthesize_exact

    small = truncated(domains, VF_th=2, VTdur=2)
    config = SynthesisConfig(backend=Backend.SMT_EMIT, free_params=("VF_th", "VTdur"), solver_timeout=600)
    solved = solve_front(list(vt_train)[:5], small, config, solver_cmd=SOLVER)
    exact = synthesize_exact(list(vt_train)[:5], small, config.replace(backend=Backend.EXACT))
    assert solved.front.pairs() == exact.pairs()
