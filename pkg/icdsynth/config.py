"""
Process-wide settings read from the environment.

Unset numeric variables stay None so an experiment manifest keeps its own
values; command-line flags override both.
"""

import os
from dataclasses import dataclass, field
from typing import Optional

__all__ = ("Settings", "DEFAULT_SOLVER", "DEFAULT_ENUM_CAP")

DEFAULT_SOLVER = "z3 {file}"
DEFAULT_ENUM_CAP = 50_000_000


def _env_int(name: str) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return None
    return int(raw.replace("_", ""))


@dataclass(frozen=True)
class Settings:
    solver_cmd: str = DEFAULT_SOLVER
    enum_cap: Optional[int] = None
    rounding: str = "half_up"
    workers: Optional[int] = None
    log_level: str = "WARNING"
    solver_from_env: bool = field(default=False, compare=False)

    @classmethod
    def from_env(cls) -> "Settings":
        solver = os.getenv("ICD_SMT_SOLVER")
        workers = _env_int("ICD_WORKERS")
        return cls(
            solver_cmd=solver or DEFAULT_SOLVER,
            enum_cap=_env_int("ICD_ENUM_CAP"),
            rounding=os.getenv("ICD_ROUNDING") or "half_up",
            workers=None if workers is None else max(1, workers),
            log_level=(os.getenv("ICD_LOG_LEVEL") or "WARNING").upper(),
            solver_from_env=bool(solver),
        )
