# -*- coding: utf-8 -*-

"""
icdsynth.smt.encoding
~~~~~~~~~~~~~~~~~~~~~

SMT-LIB2 / MaxSMT encoding of attack synthesis.

The discrimination algorithm is unrolled over every cycle of every training
signal. Everything that does not depend on a parameter (interval lengths,
integer Rhythm Match scores, variance ceilings, D5) is substituted as a
constant, so the document stays quantifier-free linear arithmetic. Each
signal contributes one soft constraint ``effective_j`` which holds when its
therapy reachability differs from the nominal one, and the ``dist`` constant
restricts the parameters through a ladder of implications
``dist <= s => lo <= P <= hi``.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from pysmt.fnode import FNode
from pysmt.shortcuts import (
    FALSE,
    GE,
    LE,
    LT,
    TRUE,
    And,
    Equals,
    Iff,
    Implies,
    Int,
    Ite,
    Not,
    Or,
    Plus,
    Symbol,
)
from pysmt.smtlib.printers import to_smtlib
from pysmt.typing import BOOL, INT

from ..base import __version__
from ..discriminator import D6_COUNT, D7_COUNT, PERSIST_COUNT, START_COUNT, TherapySignal
from ..errors import DomainError, EncodingMismatch
from ..evaluation import Evaluator
from ..parameters import PARAMETER_NAMES, ParameterDomain, ParamVector, distance
from ..signals import WINDOW, FeatureSignal, SignalSet, precompute
from .scope import Scope
from .walkers import GroundEvaluator, UnboundSymbol

__all__ = (
    "EmitMode",
    "Implication",
    "SignalEncoding",
    "SmtMetadata",
    "SmtDocument",
    "SmtEncoder",
    "PinnedCheck",
    "emit_smt",
    "check_pinned",
    "SOFT_ID",
    "DIST",
)

log = logging.getLogger(__name__)

SOFT_ID = "eff"
DIST = "dist"


class EmitMode(str, enum.Enum):
    MAX_EFF_AT_DIST = "max-eff-at-dist"
    PARETO = "pareto"


class Implication(NamedTuple):
    """``antecedent => (x_1 = e_1 and ... and x_n = e_n)``.

    Boolean targets appear as ``x`` or ``not x`` in the asserted formula.
    """

    antecedent: FNode
    assignments: Tuple[Tuple[FNode, FNode], ...]

    def formula(self) -> FNode:
        conjuncts = []
        for target, value in self.assignments:
            if target.symbol_type().is_bool_type():
                conjuncts.append(target if value.is_true() else Not(target))
            else:
                conjuncts.append(Equals(target, value))
        consequent = conjuncts[0] if len(conjuncts) == 1 else And(conjuncts)
        if self.antecedent.is_true():
            return consequent
        return Implies(self.antecedent, consequent)


class Definition(NamedTuple):
    symbol: FNode
    body: FNode

    def formula(self) -> FNode:
        return Iff(self.symbol, self.body)


@dataclass
class SignalEncoding:
    index: int
    signal_id: str
    cycles: int
    baseline: bool
    init: Implication
    steps: List[List[Implication]] = field(default_factory=list)
    therapy: List[Definition] = field(default_factory=list)
    effective: Optional[Definition] = None

    def state_names(self, k: int) -> Tuple[str, str, str, str]:
        j = self.index
        return (f"VFd_{j}_{k}", f"VTd_{j}_{k}", f"tVF_{j}_{k}", f"tVT_{j}_{k}")

    def assertions(self) -> Iterable[FNode]:
        yield self.init.formula()
        for k, step in enumerate(self.steps):
            for implication in step:
                yield implication.formula()
            yield self.therapy[k].formula()
        yield self.effective.formula()


@dataclass(frozen=True)
class SmtMetadata:
    parameters: Dict[str, str]
    signal_ids: Tuple[str, ...]
    effective: Tuple[str, ...]
    therapy: Tuple[Tuple[str, ...], ...]
    baseline: Tuple[bool, ...]
    soft_id: str = SOFT_ID
    distance: str = DIST
    mode: EmitMode = EmitMode.PARETO
    bound: Optional[int] = None
    free_params: Tuple[str, ...] = PARAMETER_NAMES

    def to_json(self) -> Dict[str, Any]:
        return {
            "parameters": dict(self.parameters),
            "signals": [
                {
                    "id": sid,
                    "effective": eff,
                    "baseline": base,
                    "state": {
                        "VFd": f"VFd_{j}_<k>",
                        "VTd": f"VTd_{j}_<k>",
                        "tVF": f"tVF_{j}_<k>",
                        "tVT": f"tVT_{j}_<k>",
                        "Th": f"Th_{j}_<k>",
                    },
                }
                for j, (sid, eff, base) in enumerate(zip(self.signal_ids, self.effective, self.baseline))
            ],
            "soft_id": self.soft_id,
            "distance": self.distance,
            "mode": self.mode.value,
            "bound": self.bound,
            "free_params": list(self.free_params),
        }


@dataclass
class SmtDocument:
    text: str
    metadata: SmtMetadata
    assertions: List[FNode] = field(default_factory=list, repr=False)
    signals: List[SignalEncoding] = field(default_factory=list, repr=False)


def _count(terms: Sequence[FNode]) -> FNode:
    return Plus([Ite(t, Int(1), Int(0)) for t in terms])


class SmtEncoder:
    """
    Builds the formulas for one training set once; :meth:`document` then
    renders them for any mode, distance bound or parameter pin.

    :param signals: The training signals.
    :param domains: Parameter lists; their encoded values become the
        admissible values of each parameter constant.
    :param free_params: Parameters the solver may change. The rest are fixed
        to their nominal value.
    :param baseline: Nominal reachability per signal, computed when omitted.
    """

    def __init__(
        self,
        signals: Iterable[FeatureSignal],
        domains: ParameterDomain,
        free_params: Optional[Iterable[str]] = None,
        baseline: Optional[Sequence[bool]] = None,
    ):
        if isinstance(signals, SignalSet):
            signals = signals.signals
        self.train = tuple(signals)
        self.domains = domains
        free = set(PARAMETER_NAMES if free_params is None else free_params)
        unknown = free - set(PARAMETER_NAMES)
        self.free_params = tuple(name for name in PARAMETER_NAMES if name in free)
        if unknown:
            raise DomainError(f"unknown parameters: {', '.join(sorted(unknown))}")
        if baseline is None:
            baseline = Evaluator(self.train, domains).baseline
        self.baseline = tuple(bool(b) for b in baseline)
        if len(self.baseline) != len(self.train):
            raise ValueError(f"{len(self.baseline)} baseline values for {len(self.train)} signals")

        self.declarations: List[FNode] = []
        self.params = {name: self._declare(name, INT) for name in PARAMETER_NAMES}
        self.dist = self._declare(DIST, INT)

        self.header: List[FNode] = list(self._param_ranges()) + list(self._ladder())
        self.signals = [self._encode_signal(j, s, b) for j, (s, b) in enumerate(zip(self.train, self.baseline))]
        log.debug(
            "encoded %d signals, %d symbols",
            len(self.signals),
            len(self.declarations),
        )

    def _declare(self, name: str, kind) -> FNode:
        symbol = Symbol(name, kind)
        self.declarations.append(symbol)
        return symbol

    def _values(self, name: str, lo: int, hi: int) -> List[int]:
        return sorted({self.domains.encoded(name, i) for i in range(lo, hi + 1)})

    def _param_ranges(self) -> Iterable[FNode]:
        nominal = self.domains.nominal()
        for name in PARAMETER_NAMES:
            symbol = self.params[name]
            if name not in self.free_params:
                yield Equals(symbol, Int(self.domains.encoded(name, getattr(nominal, name))))
                continue
            values = self._values(name, 1, self.domains[name].n)
            yield Or([Equals(symbol, Int(v)) for v in values])

    def _ladder(self) -> Iterable[FNode]:
        top = self.domains.dist_max()
        yield And(LE(Int(0), self.dist), LE(self.dist, Int(top)))
        for s in range(top + 1):
            bounds = []
            for name, (lo, hi) in self.domains.box(s).items():
                values = self._values(name, lo, hi)
                symbol = self.params[name]
                bounds.append(And(LE(Int(values[0]), symbol), LE(symbol, Int(values[-1]))))
            yield Implies(LE(self.dist, Int(s)), And(bounds))

    def _encode_signal(self, j: int, signal: FeatureSignal, baseline: bool) -> SignalEncoding:
        derived = precompute(signal)
        p = self.params
        n = len(signal)

        states = [
            tuple(self._declare(name, kind) for name, kind in zip(
                (f"VFd_{j}_{k}", f"VTd_{j}_{k}", f"tVF_{j}_{k}", f"tVT_{j}_{k}"),
                (BOOL, BOOL, INT, INT),
            ))
            for k in range(n + 1)
        ]
        therapy_symbols = [self._declare(f"Th_{j}_{k}", BOOL) for k in range(n)]
        effective = self._declare(f"effective_{j}", BOOL)

        vfd0, vtd0, tvf0, tvt0 = states[0]
        init = Implication(TRUE(), ((vfd0, FALSE()), (vtd0, FALSE()), (tvf0, Int(0)), (tvt0, Int(0))))
        encoding = SignalEncoding(j, signal.id, n, baseline, init)

        vints = signal.vints
        for k in range(n):
            vint = Int(vints[k])
            vfd, vtd, tvf, tvt = states[k]
            nvfd, nvtd, ntvf, ntvt = states[k + 1]

            def fast(lo, hi, threshold):
                return [LT(Int(vints[k - i]), threshold) for i in range(lo, hi)]

            def start(threshold):
                if k < WINDOW - 1:
                    return FALSE()
                return GE(_count(fast(0, WINDOW, threshold)), Int(START_COUNT))

            def persist(threshold):
                if k < WINDOW - 1:
                    return FALSE()
                return And(GE(_count(fast(1, WINDOW, threshold)), Int(PERSIST_COUNT)), LT(vint, threshold))

            vf_start, vf_persist = start(p["VF_th"]), persist(p["VF_th"])
            vt_start, vt_persist = start(p["VT_th"]), persist(p["VT_th"])
            vf_over = GE(Plus(tvf, vint), p["VFdur"])
            vt_over = GE(Plus(tvt, vint), p["VTdur"])
            vf_end = Or(vf_over, Not(vf_persist))
            vt_end = Or(vt_over, Not(vt_persist))

            step = []
            for mode, clock, nmode, nclock, st, end in (
                (vfd, tvf, nvfd, ntvf, vf_start, vf_end),
                (vtd, tvt, nvtd, ntvt, vt_start, vt_end),
            ):
                step.extend(
                    (
                        Implication(And(st, Or(Not(mode), end)), ((nmode, TRUE()),)),
                        Implication(And(Not(mode), Not(st)), ((nmode, FALSE()),)),
                        Implication(And(mode, Not(st), end), ((nmode, FALSE()),)),
                        Implication(And(mode, Not(end)), ((nmode, TRUE()), (nclock, Plus(clock, vint)))),
                        Implication(Or(Not(mode), end), ((nclock, Int(0)),)),
                    )
                )
            encoding.steps.append(step)

            vt_branch = [vtd, vt_persist, vt_over]
            if not derived.d5[k]:
                vt_branch.append(Not(Or(self._d6(derived, k), self._d7(signal, derived, k))))
            body = Or(And(vfd, vf_persist, vf_over), And(vt_branch))
            encoding.therapy.append(Definition(therapy_symbols[k], body))

        reach = Or(therapy_symbols)
        encoding.effective = Definition(effective, Not(reach) if baseline else reach)
        return encoding

    def _d6(self, derived, k: int) -> FNode:
        if k < WINDOW - 1:
            return FALSE()
        high = [LE(self.params["NSRcor_th"], Int(derived.fcc_centi[k - i])) for i in range(WINDOW)]
        return GE(_count(high), Int(D6_COUNT))

    def _d7(self, signal: FeatureSignal, derived, k: int) -> FNode:
        kp = signal.atrial_count[k]
        if kp < WINDOW:
            return FALSE()
        fast = [LT(Int(signal.aints[kp - 1 - i]), self.params["AFib_th"]) for i in range(WINDOW)]
        return And(GE(_count(fast), Int(D7_COUNT)), LE(Int(derived.vvar_ceil[k]), self.params["stb"]))

    def metadata(self, mode: EmitMode, bound: Optional[int]) -> SmtMetadata:
        return SmtMetadata(
            parameters={name: symbol.symbol_name() for name, symbol in self.params.items()},
            signal_ids=tuple(s.signal_id for s in self.signals),
            effective=tuple(s.effective.symbol.symbol_name() for s in self.signals),
            therapy=tuple(tuple(d.symbol.symbol_name() for d in s.therapy) for s in self.signals),
            baseline=self.baseline,
            mode=mode,
            bound=bound,
            free_params=self.free_params,
        )

    def document(
        self,
        mode: EmitMode = EmitMode.PARETO,
        bound: Optional[int] = None,
        pin: Optional[ParamVector] = None,
    ) -> SmtDocument:
        """
        Render the encoding.

        :param mode: ``MAX_EFF_AT_DIST`` asserts ``dist <= bound`` and leaves
            the soft constraints as the only objective; ``PARETO`` asks the
            solver to trade ``dist`` against them.
        :param bound: Distance bound, required for ``MAX_EFF_AT_DIST``.
        :param pin: Fix every parameter to this vector's values.
        """
        mode = EmitMode(mode)
        if mode is EmitMode.MAX_EFF_AT_DIST and bound is None:
            raise ValueError("max-eff-at-dist needs a distance bound")

        assertions = list(self.header)
        if mode is EmitMode.MAX_EFF_AT_DIST:
            assertions.append(LE(self.dist, Int(bound)))
        if pin is not None:
            self.domains.check(pin)
            assertions.extend(
                Equals(self.params[name], Int(self.domains.encoded(name, index)))
                for name, index in pin._asdict().items()
            )
        for signal in self.signals:
            assertions.extend(signal.assertions())

        lines = [
            f"; icdsynth {__version__}: {len(self.signals)} signals, mode {mode.value}"
            + (f", dist <= {bound}" if bound is not None else ""),
            "(set-option :produce-models true)",
        ]
        if mode is EmitMode.PARETO:
            lines.append("(set-option :opt.priority pareto)")
        lines.append("(set-logic QF_LIRA)")
        for symbol in self.declarations:
            sort = "Bool" if symbol.symbol_type().is_bool_type() else "Int"
            lines.append(f"(declare-fun {symbol.symbol_name()} () {sort})")
        for formula in assertions:
            lines.append(f"(assert {to_smtlib(formula, daggify=False)})")
        for signal in self.signals:
            lines.append(f"(assert-soft {signal.effective.symbol.symbol_name()} :weight 1 :id {SOFT_ID})")
        if mode is EmitMode.PARETO:
            lines.append(f"(minimize {DIST})")
        lines.extend(("(check-sat)", "(get-objectives)", "(get-model)"))

        text = "\n".join(lines) + "\n"
        log.debug("rendered %s document: %d assertions, %d bytes", mode.value, len(assertions), len(text))
        return SmtDocument(text, self.metadata(mode, bound), assertions, self.signals)


def emit_smt(
    train: Iterable[FeatureSignal],
    domains: ParameterDomain,
    mode: EmitMode = EmitMode.PARETO,
    bound: Optional[int] = None,
    free_params: Optional[Iterable[str]] = None,
    baseline: Optional[Sequence[bool]] = None,
    pin: Optional[ParamVector] = None,
) -> SmtDocument:
    return SmtEncoder(train, domains, free_params, baseline).document(mode, bound, pin)


class PinnedCheck(NamedTuple):
    therapy: Tuple[TherapySignal, ...]
    effective: Tuple[bool, ...]


def check_pinned(doc: SmtDocument, v: ParamVector, domains: ParameterDomain) -> PinnedCheck:
    """
    Evaluate a document with every parameter fixed to ``v``.

    State variables are derived by firing the transition implications cycle
    by cycle. Every state must be forced exactly once, and every hard
    assertion must then hold; otherwise :class:`EncodingMismatch` is raised.
    """
    scope = Scope({name: domains.encoded(name, index) for name, index in v._asdict().items()})
    scope.update_globals({doc.metadata.distance: distance(v, domains)})
    evaluator = GroundEvaluator(scope)

    def value(formula: FNode):
        try:
            return evaluator.evaluate(formula)
        except UnboundSymbol as exc:
            raise EncodingMismatch(f"{exc.name} is read before the encoding determines it") from None

    def fire(implication: Implication):
        if not value(implication.antecedent):
            return
        for target, expr in implication.assignments:
            try:
                scope.assign(target.symbol_name(), value(expr))
            except ValueError as exc:
                raise EncodingMismatch(f"conflicting transition at {v}: {exc}") from None

    therapy = []
    effective = []
    for signal in doc.signals:
        fire(signal.init)
        for k, step in enumerate(signal.steps):
            for implication in step:
                fire(implication)
            for name in signal.state_names(k + 1):
                if name not in scope:
                    raise EncodingMismatch(f"{name} is not forced by the transition relation")
            definition = signal.therapy[k]
            scope.assign(definition.symbol.symbol_name(), bool(value(definition.body)))
        therapy.append(TherapySignal(tuple(scope[d.symbol.symbol_name()] for d in signal.therapy)))
        scope.assign(signal.effective.symbol.symbol_name(), bool(value(signal.effective.body)))
        effective.append(scope[signal.effective.symbol.symbol_name()])

    for index, formula in enumerate(doc.assertions):
        if not value(formula):
            raise EncodingMismatch(f"assertion {index} does not hold at {v}: {to_smtlib(formula)[:120]}")
    return PinnedCheck(tuple(therapy), tuple(effective))
