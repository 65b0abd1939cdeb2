# -*- coding: utf-8 -*-

"""
icdsynth.smt.sexpr
~~~~~~~~~~~~~~~~~~

A small reader for the S-expressions solvers print.

Solver output is a sequence of top-level blocks: bare atoms such as ``sat``,
and parenthesised lists such as the model or the objective report. Each
block is returned together with the line it started on, so decode errors
can point at the offending text.
"""

import collections
from typing import List, Union

from ..errors import DecodeError

__all__ = ("Block", "read_blocks", "Sexp")

Sexp = Union[str, List["Sexp"]]

Block = collections.namedtuple("Block", "line content text")


def read_blocks(text: str) -> List[Block]:
    """
    Splits solver output into top-level blocks.

    Atoms are kept as strings, ``|quoted|`` symbols lose their bars and
    ``"strings"`` keep their quotes. ``;`` comments are dropped.
    """
    blocks: List[Block] = []
    stack: List[list] = []
    start_line = 0
    start_offset = 0
    line = 1
    token: List[str] = []
    in_string = False
    in_quoted = False
    in_comment = False

    def flush():
        if not token:
            return
        atom = "".join(token)
        token.clear()
        if stack:
            stack[-1].append(atom)
        else:
            blocks.append(Block(line, atom, atom))

    for offset, char in enumerate(text):
        if in_comment:
            if char == "\n":
                in_comment = False
                line += 1
            continue
        if in_string:
            token.append(char)
            if char == '"':
                in_string = False
            elif char == "\n":
                line += 1
            continue
        if in_quoted:
            if char == "|":
                in_quoted = False
            else:
                token.append(char)
                if char == "\n":
                    line += 1
            continue

        if char == ";":
            flush()
            in_comment = True
        elif char == '"':
            token.append(char)
            in_string = True
        elif char == "|":
            in_quoted = True
        elif char == "(":
            flush()
            if not stack:
                start_line = line
                start_offset = offset
            stack.append([])
        elif char == ")":
            flush()
            if not stack:
                raise DecodeError("unbalanced ')'", line, text.splitlines()[line - 1] if text else "")
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                blocks.append(Block(start_line, done, text[start_offset : offset + 1]))
        elif char.isspace():
            flush()
            if char == "\n":
                line += 1
        else:
            token.append(char)

    if in_string or in_quoted or stack:
        snippet = text[start_offset : start_offset + 80] if stack else ""
        raise DecodeError("unterminated expression at end of output", start_line if stack else line, snippet)
    flush()
    return blocks
