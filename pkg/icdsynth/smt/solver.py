# -*- coding: utf-8 -*-

"""
icdsynth.smt.solver
~~~~~~~~~~~~~~~~~~~

Pareto fronts through an external solver.

One ``max-eff-at-dist`` document is solved per distance bound. Every decoded
witness is re-simulated; a disagreement with the count the solver claims
means the encoding and the simulator have drifted apart.
"""

import logging
import time
from fractions import Fraction
from typing import Iterable, List, Optional

from ..config import DEFAULT_SOLVER
from ..errors import EncodingMismatch
from ..evaluation import Evaluator
from ..parameters import ParameterDomain, distance
from ..signals import FeatureSignal, SignalSet
from ..objectives import pareto_filter
from ..synthesis.config import Backend, LayerStats, SynthesisConfig, SynthesisRun
from .decode import DecodedModel, decode_model
from .encoding import EmitMode, SmtEncoder
from .shell import run_external_solver

__all__ = ("solve_front",)

log = logging.getLogger(__name__)


def solve_front(
    train: Iterable[FeatureSignal],
    domains: ParameterDomain,
    config: SynthesisConfig,
    solver_cmd: Optional[str] = None,
) -> SynthesisRun:
    began = time.perf_counter()
    if isinstance(train, SignalSet):
        train = train.signals
    train = tuple(train)
    command = solver_cmd or config.solver_cmd or DEFAULT_SOLVER

    evaluator = Evaluator(train, domains, workers=config.workers)
    encoder = SmtEncoder(train, domains, config.free_params, evaluator.baseline)

    candidates = []
    layers: List[LayerStats] = []
    decoded: List[DecodedModel] = []
    for s in range(config.horizon(domains) + 1):
        doc = encoder.document(EmitMode.MAX_EFF_AT_DIST, bound=s)
        output = run_external_solver(command, doc, config.solver_timeout)
        model = decode_model(output, domains, doc.metadata)

        simulated = evaluator.flips(model.vector)
        if simulated != model.effective_count:
            raise EncodingMismatch(
                f"solver claims {model.effective_count} effective signals at {model.vector},"
                f" simulation gives {simulated}"
            )
        effectiveness = Fraction(simulated, len(train)) if train else Fraction(0)
        candidates.append((distance(model.vector, domains), effectiveness, model.vector))
        decoded.append(model)
        layers.append(LayerStats(s, len(decoded), effectiveness, model.vector))
        log.info("dist <= %d: %d/%d effective", s, simulated, len(train))

    front = pareto_filter(candidates)
    elapsed = time.perf_counter() - began
    return SynthesisRun(Backend.SMT_EMIT, front, len(decoded), elapsed, tuple(layers), {"solver": command})
