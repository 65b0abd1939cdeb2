"""
Command line front end.

    icdsynth gen SVT-tracking -n 100 --seed 1 --out train.json
    icdsynth synth --manifest experiment.json
    icdsynth validate out/report.json test.json --out out/
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .base import base
from .config import Settings
from .discriminator import TherapySignal, format_trace, run, trace
from .errors import ConfigurationError, IcdSynthError
from .generator import generate, generate_mixed, resolve_condition
from .manifest import ExperimentManifest
from .objectives import auc, evaluate_front, front_statistics
from .parameters import ParameterDomain, expand_domains, load_domains, to_params
from .reports import (
    format_fraction,
    front_report,
    load_front,
    therapy_csv,
    validation_csv,
    write_json,
    write_run,
)
from .signals import atomic_write_text, load_signals, save_signals
from .synthesis import Backend, SynthesisConfig, compare_backends, synthesize, training_size_sweep

__all__ = ("build_parser", "main")

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _domains(args, settings: Settings) -> ParameterDomain:
    if getattr(args, "domains", None):
        return load_domains(args.domains, args.rounding)
    return expand_domains(args.rounding or settings.rounding)


def _experiment(args, settings: Settings) -> ExperimentManifest:
    overrides = dict(
        backend=getattr(args, "backend", None),
        free_params=args.free_params,
        max_distance=args.max_distance,
        budget=getattr(args, "budget", None),
        time_budget=getattr(args, "time_budget", None),
        seed=args.seed,
        enum_cap=settings.enum_cap,
        workers=args.workers or settings.workers,
        solver_cmd=getattr(args, "solver_cmd", None) or (settings.solver_cmd if settings.solver_from_env else None),
        solver_timeout=getattr(args, "timeout", None),
    )
    if args.manifest:
        manifest = ExperimentManifest.load(args.manifest, **overrides)
        if args.out:
            manifest = ExperimentManifest(
                manifest.train, Path(args.out), manifest.config, manifest.test, manifest.domains, manifest.seed
            )
        return manifest
    if not args.train:
        raise ConfigurationError("either --manifest or --train is required")

    return ExperimentManifest(
        train=Path(args.train),
        test=Path(args.test) if args.test else None,
        domains=Path(args.domains) if args.domains else None,
        out=Path(args.out or "out"),
        seed=args.seed,
        config=SynthesisConfig.from_json({}, **overrides),
    )


def _manifest_domains(manifest: ExperimentManifest, args, settings: Settings) -> ParameterDomain:
    if manifest.domains is None:
        return manifest.load_domains(args.rounding or settings.rounding)
    return manifest.load_domains(args.rounding)


def cmd_gen(args, settings: Settings) -> int:
    domains = _domains(args, settings)
    if args.mix:
        specs = [resolve_condition(ref.strip()) for ref in args.mix.split(",") if ref.strip()]
        signals = generate_mixed(specs, args.n, args.seed, not args.no_calibrate, domains)
    elif args.condition:
        signals = generate(resolve_condition(args.condition), args.n, args.seed, not args.no_calibrate, domains)
    else:
        raise ConfigurationError("name a condition or pass --mix")
    save_signals(signals, args.out)
    log.info("wrote %d signals to %s", len(signals), args.out)
    return 0


def _overrides(pairs: Sequence[str]) -> dict:
    values = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep:
            raise ConfigurationError(f"expected NAME=VALUE, got {pair!r}")
        values[name.strip()] = value.strip()
    return values


def cmd_simulate(args, settings: Settings) -> int:
    domains = _domains(args, settings)
    signals = load_signals(args.signals)
    vector = domains.vector(**_overrides(args.set or ()))
    params = to_params(vector, domains)

    out = Path(args.out)
    results = []
    for signal in signals:
        if args.trace:
            records = trace(signal, params)
            atomic_write_text(out / "traces" / f"{signal.id}.tsv", format_trace(records))
            therapy = TherapySignal(tuple(record.therapy for record in records))
        else:
            therapy = run(signal, params)
        results.append((signal, therapy))
    atomic_write_text(out / "therapy.csv", therapy_csv(results))
    reached = sum(1 for _, therapy in results if any(therapy))
    print(f"{reached}/{len(results)} signals reach therapy")
    return 0


def _finish_run(run_result, manifest: ExperimentManifest, domains: ParameterDomain) -> int:
    train = manifest.load_train()
    test = manifest.load_test()
    stats = front_statistics(run_result.front, train, domains, test)
    extra = {
        "backend": run_result.backend.value,
        "config": manifest.config.to_json(),
        "evaluations": run_result.evaluations,
        "layers": run_result.layers_json(),
        "auc_train": format_fraction(auc(run_result.front.pairs(), domains)),
    }
    if test is not None:
        extra["auc_test"] = format_fraction(auc(evaluate_front(run_result.front, test, domains), domains))
    report = front_report(run_result.front, domains, stats, extra)
    for path in write_run(manifest.out, run_result.front, domains, report, run_result.elapsed):
        log.info("wrote %s", path)
    print(f"{len(run_result.front)} front points, best effectiveness {format_fraction(run_result.front.best().effectiveness)}")
    return 0


def cmd_synth(args, settings: Settings) -> int:
    manifest = _experiment(args, settings)
    domains = _manifest_domains(manifest, args, settings)
    result = synthesize(manifest.load_train(), domains, manifest.config)
    return _finish_run(result, manifest, domains)


def cmd_solve(args, settings: Settings) -> int:
    manifest = _experiment(args, settings)
    manifest = ExperimentManifest(
        manifest.train,
        manifest.out,
        manifest.config.replace(backend=Backend.SMT_EMIT),
        manifest.test,
        manifest.domains,
        manifest.seed,
    )
    domains = _manifest_domains(manifest, args, settings)
    result = synthesize(manifest.load_train(), domains, manifest.config)
    return _finish_run(result, manifest, domains)


def cmd_emit_smt(args, settings: Settings) -> int:
    from .smt import EmitMode, emit_smt

    manifest = _experiment(args, settings)
    domains = _manifest_domains(manifest, args, settings)
    mode = EmitMode(args.mode)
    if mode is EmitMode.MAX_EFF_AT_DIST and args.bound is None:
        raise ConfigurationError("max-eff-at-dist needs --bound")

    doc = emit_smt(manifest.load_train(), domains, mode, args.bound, manifest.config.free_params)
    target = Path(args.smt_out)
    atomic_write_text(target, doc.text)
    write_json(target.with_suffix(".json"), doc.metadata.to_json())
    log.info("wrote %s (%d bytes)", target, len(doc.text))
    return 0


def cmd_validate(args, settings: Settings) -> int:
    domains = _domains(args, settings)
    front = load_front(args.front, domains)
    test = load_signals(args.test_signals)
    series = evaluate_front(front, test, domains)
    if len(front):
        score = sum((te - p.effectiveness for p, (_, te) in zip(front, series)), 0) / len(front)
    else:
        score = 0
    out = Path(args.out)
    atomic_write_text(out / "validation.csv", validation_csv(front, series))
    write_json(
        out / "validation.json",
        {"validation_score": format_fraction(score), "auc_test": format_fraction(auc(series, domains))},
    )
    print(f"validation score {format_fraction(score)}")
    return 0


def cmd_compare(args, settings: Settings) -> int:
    manifest = _experiment(args, settings)
    domains = _manifest_domains(manifest, args, settings)
    comparison = compare_backends(manifest.load_train(), domains, manifest.config, manifest.load_test())
    write_json(manifest.out / "comparison.json", comparison.to_json())
    print(
        f"AUC train: exact {format_fraction(comparison.auc_train_exact)},"
        f" random {format_fraction(comparison.auc_train_random)}"
    )
    return 0


def cmd_sweep(args, settings: Settings) -> int:
    manifest = _experiment(args, settings)
    domains = _manifest_domains(manifest, args, settings)
    test = manifest.load_test()
    if test is None:
        raise ConfigurationError("a sweep needs a test set")
    try:
        sizes = [int(size) for size in args.sizes.split(",")]
    except ValueError:
        raise ConfigurationError(f"bad --sizes {args.sizes!r}") from None

    points = training_size_sweep(manifest.load_train(), test, sizes, domains, manifest.config)
    lines = ["size,test_auc,relative"]
    for point in points:
        relative = "" if point.relative is None else format_fraction(point.relative)
        lines.append(f"{point.size},{format_fraction(point.test_auc)},{relative}")
    atomic_write_text(manifest.out / "sweep.csv", "\n".join(lines) + "\n")
    return 0


def _experiment_flags(parser: argparse.ArgumentParser, out_help: str = "output directory") -> None:
    parser.add_argument("--manifest", help="experiment manifest (JSON)")
    parser.add_argument("--train", help="training signal set, when no manifest is given")
    parser.add_argument("--test", help="test signal set")
    parser.add_argument("--free-params", help="comma separated parameters the attacker may change")
    parser.add_argument("--max-distance", type=int, help="largest distance layer to explore")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int, help="worker threads (ICD_WORKERS)")
    parser.add_argument("--out", help=out_help)


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--log-level", help="logging level (ICD_LOG_LEVEL)")
    common.add_argument("--domains", help="domain override file (JSON)")
    common.add_argument("--rounding", choices=("half_up", "ceiling"), help="BPM to ms rounding (ICD_ROUNDING)")

    parser = ArgumentParser(prog=base["name"], description=base["description"])
    parser.add_argument("--version", action="version", version=f"%(prog)s {base['version']}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=ArgumentParser)
    sub.required = True

    gen = sub.add_parser("gen", parents=[common], help="generate a labelled signal set")
    gen.add_argument("condition", nargs="?", help="builtin condition name or condition spec file")
    gen.add_argument("-n", type=int, required=True, help="number of signals")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--mix", help="comma separated conditions of one class, drawn uniformly")
    gen.add_argument("--no-calibrate", action="store_true", help="skip the nominal-parameter check")
    gen.add_argument("--out", required=True, help="signal set file")
    gen.set_defaults(func=cmd_gen)

    sim = sub.add_parser("simulate", parents=[common], help="run the discriminator on a signal set")
    sim.add_argument("signals")
    sim.add_argument("--set", action="append", metavar="NAME=VALUE", help="parameter value in programmed units")
    sim.add_argument("--trace", action="store_true", help="also dump per-cycle traces")
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=cmd_simulate)

    synth = sub.add_parser("synth", parents=[common], help="synthesize a Pareto front")
    _experiment_flags(synth)
    synth.add_argument("--backend", choices=[b.value for b in Backend])
    synth.add_argument("--budget", type=int, help="random search evaluations")
    synth.add_argument("--time-budget", type=float, help="random search seconds")
    synth.add_argument("--solver-cmd", help="solver command template for the smt backend (ICD_SMT_SOLVER)")
    synth.add_argument("--timeout", type=float, help="seconds per solver call")
    synth.set_defaults(func=cmd_synth)

    emit = sub.add_parser("emit-smt", parents=[common], help="write an SMT-LIB2 document")
    _experiment_flags(emit)
    emit.add_argument("--mode", choices=("pareto", "max-eff-at-dist"), default="pareto")
    emit.add_argument("--bound", type=int, help="distance bound for max-eff-at-dist")
    emit.add_argument("--smt-out", required=True, help=".smt2 file; metadata goes next to it")
    emit.set_defaults(func=cmd_emit_smt)

    solve = sub.add_parser("solve", parents=[common], help="synthesize a front through an external solver")
    _experiment_flags(solve)
    solve.add_argument("--solver-cmd", help="command template with a {file} placeholder (ICD_SMT_SOLVER)")
    solve.add_argument("--timeout", type=float, help="seconds per solver call")
    solve.set_defaults(func=cmd_solve)

    validate = sub.add_parser("validate", parents=[common], help="score a front on a test set")
    validate.add_argument("front", help="report.json of a synthesis run")
    validate.add_argument("test_signals")
    validate.add_argument("--out", required=True, help="output directory")
    validate.set_defaults(func=cmd_validate)

    compare = sub.add_parser("compare", parents=[common], help="exact synthesis against random search")
    _experiment_flags(compare)
    compare.add_argument("--budget", type=int, help="random search evaluations (default: time matched)")
    compare.set_defaults(func=cmd_compare)

    sweep = sub.add_parser("sweep", parents=[common], help="test AUC against training set size")
    _experiment_flags(sweep)
    sweep.add_argument("--sizes", required=True, help="comma separated training sizes")
    sweep.add_argument("--backend", choices=[b.value for b in Backend])
    sweep.add_argument("--budget", type=int)
    sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    settings = Settings.from_env()
    parser = build_parser()
    args = parser.parse_args(argv)

    level = (args.log_level or settings.log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format=LOG_FORMAT, stream=sys.stderr)

    try:
        return args.func(args, settings)
    except IcdSynthError as exc:
        log.error("%s", exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
