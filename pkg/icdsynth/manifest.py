"""
Experiment manifests: one JSON file naming the signal sets, the domain
override and the synthesis settings of a run.

Relative paths are resolved against the manifest's own directory.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .errors import ConfigurationError
from .parameters import ParameterDomain, expand_domains, load_domains
from .signals import SignalSet, load_signals
from .synthesis.config import SynthesisConfig

__all__ = ("ExperimentManifest",)

log = logging.getLogger(__name__)

_KEYS = {"train", "test", "domains", "out", "seed", "config"}


def _resolve(base: Path, value: Optional[str]) -> Optional[Path]:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


@dataclass(frozen=True)
class ExperimentManifest:
    train: Path
    out: Path
    config: SynthesisConfig
    test: Optional[Path] = None
    domains: Optional[Path] = None
    seed: Optional[int] = None

    def __post_init__(self):
        for label, path in (("train", self.train), ("test", self.test), ("domains", self.domains)):
            if path is not None and not path.is_file():
                raise ConfigurationError(f"{label} file {path} does not exist")
        if self.out.exists() and not self.out.is_dir():
            raise ConfigurationError(f"output path {self.out} is not a directory")

    @classmethod
    def load(cls, path: Union[str, Path], **overrides) -> "ExperimentManifest":
        """
        :param overrides: Synthesis settings from the command line; ``None``
            values leave the manifest's settings alone.
        """
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read manifest {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{path}: top level must be an object")
        unknown = set(raw) - _KEYS
        if unknown:
            raise ConfigurationError(f"{path}: unknown keys {', '.join(sorted(unknown))}")
        if "train" not in raw:
            raise ConfigurationError(f"{path}: 'train' is required")

        base = path.parent
        seed = overrides.pop("seed", None)
        if seed is None:
            seed = raw.get("seed")
        config_raw = dict(raw.get("config") or {})
        if seed is not None:
            config_raw.setdefault("seed", seed)
        config = SynthesisConfig.from_json(config_raw, seed=seed, **overrides)

        return cls(
            train=_resolve(base, raw["train"]),
            test=_resolve(base, raw.get("test")),
            domains=_resolve(base, raw.get("domains")),
            out=_resolve(base, raw.get("out", "out")),
            seed=seed,
            config=config,
        )

    def load_domains(self, rounding: Optional[str] = None) -> ParameterDomain:
        if self.domains is None:
            return expand_domains(rounding or "half_up")
        return load_domains(self.domains, rounding)

    def load_train(self) -> SignalSet:
        return load_signals(self.train)

    def load_test(self) -> Optional[SignalSet]:
        return None if self.test is None else load_signals(self.test)

    def to_json(self) -> Dict[str, Any]:
        return {
            "train": str(self.train),
            "test": None if self.test is None else str(self.test),
            "domains": None if self.domains is None else str(self.domains),
            "seed": self.seed,
            "config": self.config.to_json(),
        }
