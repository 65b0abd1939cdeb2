# -*- coding: utf-8 -*-

"""
icdsynth.smt.shell
~~~~~~~~~~~~~~~~~~

Running an external SMT solver on an emitted document.

The solver is any command line; ``{file}`` in the template is replaced by
the path of the document, and the path is appended when the template has no
placeholder. Identical concurrent requests share one solver process.
"""

import asyncio
import logging
import re
import shlex
import shutil
import tempfile
import threading
from concurrent.futures import Future
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..base import digest
from ..errors import SolverExitError, SolverNotFound, SolverTimeout
from .encoding import SmtDocument

__all__ = ("SolverReader", "build_command", "run_external_solver", "clean_text")

log = logging.getLogger(__name__)

PLACEHOLDER = "{file}"

_inflight: Dict[Tuple[str, str, Optional[float]], Future] = {}
_inflight_lock = threading.Lock()


def clean_text(data: bytes) -> str:
    """
    Decodes solver output and strips terminal colour sequences.
    """

    text = data.decode("utf-8", errors="replace").replace("\r", "")
    return re.sub(r"\x1b[^m]*m", "", text)


def build_command(template: str, path: Union[str, Path]) -> List[str]:
    tokens = shlex.split(template)
    if not tokens:
        raise SolverNotFound(template)
    if any(PLACEHOLDER in token for token in tokens):
        return [token.replace(PLACEHOLDER, str(path)) for token in tokens]
    return tokens + [str(path)]


class SolverReader:
    """
    A solver process run on one document, read to completion.

    Example
    -------
    .. code:: python3

        async with SolverReader(["z3", "/tmp/query.smt2"], timeout=60) as reader:
            output = await reader.read()
    """

    def __init__(self, sequence: List[str], timeout: Optional[float] = None):
        self.sequence = sequence
        self.timeout = timeout
        self.process: Optional[asyncio.subprocess.Process] = None
        self.close_code: Optional[int] = None
        self.stderr = ""

    async def __aenter__(self):
        try:
            self.process = await asyncio.create_subprocess_exec(
                *self.sequence,
                stdout=asyncio.subprocess.PIPE,
                stderr=asyncio.subprocess.PIPE,
            )
        except FileNotFoundError:
            raise SolverNotFound(self.sequence[0]) from None
        return self

    async def __aexit__(self, *args):
        if self.process is not None and self.process.returncode is None:
            self.process.kill()
            await self.process.wait()
        if self.process is not None:
            self.close_code = self.process.returncode

    async def read(self) -> str:
        try:
            stdout, stderr = await asyncio.wait_for(self.process.communicate(), timeout=self.timeout)
        except asyncio.TimeoutError:
            raise SolverTimeout(self.timeout) from None

        self.stderr = clean_text(stderr)
        if self.stderr.strip():
            log.debug("solver stderr: %s", self.stderr.strip())
        if self.process.returncode != 0:
            raise SolverExitError(self.process.returncode, self.stderr)
        return clean_text(stdout)


async def _solve(template: str, doc: SmtDocument, timeout: Optional[float]) -> str:
    name = f"icdsynth-{digest(doc.text)}.smt2"
    workdir = tempfile.mkdtemp(prefix="icdsynth-")
    try:
        path = Path(workdir) / name
        path.write_text(doc.text, encoding="utf-8")
        sequence = build_command(template, path)
        log.info("running solver: %s", " ".join(shlex.quote(part) for part in sequence))
        async with SolverReader(sequence, timeout) as reader:
            output = await reader.read()
        log.info("solver exited with status %s", reader.close_code)
        return output
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


def run_external_solver(
    command_template: str,
    doc: SmtDocument,
    timeout: Optional[float] = None,
) -> str:
    """
    Write ``doc`` to a temporary file, run the solver on it and return stdout.

    :param command_template: Command line, optionally containing ``{file}``.
    :param doc: The document to solve.
    :param timeout: Seconds before the solver is killed; ``None`` waits forever.
    :raises SolverTimeout: The solver did not finish in time.
    :raises SolverNotFound: The solver binary does not exist.
    :raises SolverExitError: The solver exited with a nonzero status.
    """
    key = (digest(doc.text), command_template, timeout)
    with _inflight_lock:
        pending = _inflight.get(key)
        owner = pending is None
        if owner:
            pending = _inflight[key] = Future()

    if not owner:
        log.debug("waiting for an identical solver run already in progress")
        return pending.result()

    try:
        result = asyncio.run(_solve(command_template, doc, timeout))
    except BaseException as exc:
        pending.set_exception(exc)
        raise
    else:
        pending.set_result(result)
        return result
    finally:
        with _inflight_lock:
            _inflight.pop(key, None)
