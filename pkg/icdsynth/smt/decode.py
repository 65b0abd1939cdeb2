# -*- coding: utf-8 -*-

"""
icdsynth.smt.decode
~~~~~~~~~~~~~~~~~~~

Reading solver answers back into parameter vectors.
"""

import logging
from fractions import Fraction
from typing import Dict, NamedTuple, Optional, Union

from ..errors import DecodeError
from ..parameters import PARAMETER_NAMES, ParameterDomain, ParamVector
from .encoding import SmtMetadata
from .sexpr import Block, Sexp, read_blocks

__all__ = ("DecodedModel", "decode_model", "parse_value")

log = logging.getLogger(__name__)

Value = Union[bool, int, Fraction]

STATUSES = ("sat", "unsat", "unknown")


class DecodedModel(NamedTuple):
    vector: ParamVector
    effective_count: int
    dist: Optional[int]
    objectives: Dict[str, Value]
    status: str
    model: Dict[str, Value]


def parse_value(term: Sexp, line: Optional[int] = None) -> Value:
    """``true``, ``42``, ``(- 42)``, ``(/ 1 2)`` and ``3.0`` style model values."""
    if isinstance(term, str):
        if term == "true":
            return True
        if term == "false":
            return False
        try:
            return int(term)
        except ValueError:
            pass
        try:
            return Fraction(term)
        except ValueError:
            raise DecodeError(f"cannot read value {term!r}", line) from None

    if len(term) == 2 and term[0] == "-":
        inner = parse_value(term[1], line)
        if not isinstance(inner, bool):
            return -inner
    if len(term) == 3 and term[0] == "/":
        num, den = parse_value(term[1], line), parse_value(term[2], line)
        if not isinstance(num, bool) and not isinstance(den, bool) and den != 0:
            return Fraction(num) / Fraction(den)
    raise DecodeError(f"cannot read value {term!r}", line)


def _definitions(block: Block, model: Dict[str, Value]) -> bool:
    """Collects ``(define-fun name () Sort value)`` entries; False if there are none."""
    content = block.content
    if isinstance(content, str):
        return False
    entries = content[1:] if content and content[0] == "model" else content
    found = False
    for entry in entries:
        if isinstance(entry, list) and len(entry) == 5 and entry[0] == "define-fun":
            _, name, args, _sort, value = entry
            if args:
                raise DecodeError(f"unexpected function {name} with arguments", block.line, block.text)
            model[name] = parse_value(value, block.line)
            found = True
    return found


def _objectives(block: Block) -> Optional[Dict[str, Value]]:
    content = block.content
    if isinstance(content, str) or not content or content[0] != "objectives":
        return None
    out = {}
    for entry in content[1:]:
        if not isinstance(entry, list) or len(entry) != 2:
            raise DecodeError("malformed objective entry", block.line, block.text)
        key = entry[0] if isinstance(entry[0], str) else " ".join(map(str, entry[0]))
        out[key] = parse_value(entry[1], block.line)
    return out


def decode_model(text: str, domains: ParameterDomain, metadata: SmtMetadata) -> DecodedModel:
    """
    Map a solver's ``check-sat`` / ``get-objectives`` / ``get-model`` output
    back to a parameter vector.

    The effective count is read from the ``effective_j`` values when the
    model lists them, and from the soft-constraint penalty otherwise.
    """
    blocks = read_blocks(text)

    status = None
    status_line = None
    errors = []
    objectives: Dict[str, Value] = {}
    model: Dict[str, Value] = {}

    for block in blocks:
        if isinstance(block.content, str):
            if block.content in STATUSES and status is None:
                status, status_line = block.content, block.line
            continue
        if block.content and block.content[0] == "error":
            errors.append(block)
            continue
        found = _objectives(block)
        if found is not None:
            objectives.update(found)
            continue
        if not _definitions(block, model):
            log.debug("ignoring solver output block at line %d", block.line)

    if status is None:
        first = blocks[0] if blocks else None
        raise DecodeError(
            "no sat/unsat/unknown answer in solver output",
            first.line if first else None,
            first.text if first else text,
        )
    if status == "unsat":
        raise DecodeError("solver reports the encoding unsatisfiable", status_line, status)
    if status == "unknown":
        log.warning("solver answered unknown; reading the model it printed anyway")
    if not model:
        detail = errors[0] if errors else None
        raise DecodeError(
            "solver output has no model",
            detail.line if detail else status_line,
            detail.text if detail else "",
        )

    indices = {}
    for name in PARAMETER_NAMES:
        symbol = metadata.parameters[name]
        if symbol not in model:
            raise DecodeError(f"model does not assign {symbol}")
        value = model[symbol]
        if isinstance(value, bool) or Fraction(value).denominator != 1:
            raise DecodeError(f"{symbol} = {value} is not an integer")
        indices[name] = _index_of(domains, name, int(value))

    if all(name in model for name in metadata.effective):
        count = sum(bool(model[name]) for name in metadata.effective)
    elif metadata.soft_id in objectives:
        count = len(metadata.effective) - int(objectives[metadata.soft_id])
    else:
        raise DecodeError("neither effective_j values nor a soft-constraint objective in solver output")

    dist = model.get(metadata.distance)
    return DecodedModel(
        vector=ParamVector(**indices),
        effective_count=count,
        dist=None if dist is None else int(dist),
        objectives=objectives,
        status=status,
        model=model,
    )


def _index_of(domains: ParameterDomain, name: str, value: int) -> int:
    plist = domains[name]
    for index in range(1, plist.n + 1):
        if domains.encoded(name, index) == value:
            return index
    raise DecodeError(f"{name} = {value} is not a programmable value")
