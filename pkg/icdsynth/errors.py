"""
Exception hierarchy shared by every icdsynth module.

Each error carries the process exit code the command line maps it to.
"""

from typing import Optional

__all__ = (
    "IcdSynthError",
    "SignalFormatError",
    "DomainError",
    "ConfigurationError",
    "ConditionSpecError",
    "GridTooLargeError",
    "DecodeError",
    "EncodingMismatch",
    "SolverError",
    "SolverTimeout",
    "SolverExitError",
    "SolverNotFound",
)


class IcdSynthError(Exception):
    exit_code = 2


class SignalFormatError(IcdSynthError):
    def __init__(
        self,
        signal_id: Optional[str],
        field: str,
        reason: str,
        index: Optional[int] = None,
    ):
        self.signal_id = signal_id
        self.field = field
        self.index = index
        self.reason = reason

        where = f"signal {signal_id!r}" if signal_id is not None else "signal set"
        at = f"[{index}]" if index is not None else ""
        super().__init__(f"{where}: field {field}{at}: {reason}")


class DomainError(IcdSynthError):
    pass


class ConditionSpecError(IcdSynthError):
    pass


class ConfigurationError(IcdSynthError):
    exit_code = 1


class GridTooLargeError(IcdSynthError):
    def __init__(self, grid_size: int, cap: int):
        self.grid_size = grid_size
        self.cap = cap
        super().__init__(
            f"restricted grid has {grid_size} points, above the enumeration cap of {cap};"
            " restrict --free-params or --max-distance, or use the SMT path"
        )


class DecodeError(IcdSynthError):
    def __init__(self, reason: str, line: Optional[int] = None, text: str = ""):
        self.reason = reason
        self.line = line
        self.text = text

        where = f"line {line}: " if line is not None else ""
        snippet = f" ({text.strip()[:80]!r})" if text.strip() else ""
        super().__init__(f"{where}{reason}{snippet}")


class EncodingMismatch(IcdSynthError):
    pass


class SolverError(IcdSynthError):
    exit_code = 3


class SolverTimeout(SolverError):
    def __init__(self, timeout: float):
        self.timeout = timeout
        super().__init__(f"TIMEOUT: solver did not finish within {timeout} s")


class SolverExitError(SolverError):
    def __init__(self, returncode: int, stderr: str = ""):
        self.returncode = returncode
        self.stderr = stderr
        super().__init__(f"solver exited with status {returncode}: {stderr.strip()[:200]}")


class SolverNotFound(SolverError):
    def __init__(self, command: str):
        self.command = command
        super().__init__(f"solver binary not found: {command}")
