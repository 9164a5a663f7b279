from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import yaml
from pydantic import ValidationError

from nqa_engine.domain.errors import ConfigError
from nqa_engine.domain.run_models import ConfigRun

# `N=256` on the command line is short for `chain.N=256`.
CHAIN_KEYS = {"N", "J", "g", "delta", "tau"}


def _parse_scalar(text: str) -> Any:
    """Override values are parsed as YAML scalars, so `1e-3`, `true` and `[64, 128]` all work."""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as error:
        raise ConfigError(f"Cannot parse override value {text!r}: {error}") from error


def _apply_override(raw: Dict[str, Any], assignment: str) -> None:
    key, sep, value = assignment.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"Overrides must look like key=value, got {assignment!r}")
    path = key.replace("-", "_").split(".")
    if len(path) == 1 and path[0] in CHAIN_KEYS:
        path = ["chain", path[0]]

    node = raw
    for part in path[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"Override {key!r} descends into the non-mapping field {part!r}")
        node = child
    node[path[-1]] = _parse_scalar(value)


class RunConfigLoader:
    """
    Loads a run configuration from a YAML file, applies command-line overrides and
    validates the result against the Pydantic models.
    """

    def __init__(self, default_sample_count: int = 512):
        self._default_sample_count = default_sample_count

    def load(self, file_path: Optional[Path] = None, overrides: Iterable[str] = ()) -> ConfigRun:
        raw: Dict[str, Any] = {}
        if file_path is not None:
            if not file_path.exists():
                raise ConfigError(f"Run configuration not found: {file_path}")
            try:
                with open(file_path, 'r', encoding='utf-8') as f:
                    raw = yaml.safe_load(f) or {}
            except yaml.YAMLError as error:
                raise ConfigError(f"Malformed YAML in {file_path}: {error}") from error
            if not isinstance(raw, dict):
                raise ConfigError(f"{file_path} must hold a mapping at the top level")
            if "sweep-tau" in raw:
                raw["sweep_tau"] = raw.pop("sweep-tau")

        raw.setdefault("sample_count", self._default_sample_count)
        for assignment in overrides:
            _apply_override(raw, assignment)

        try:
            return ConfigRun(**raw)
        except ValidationError as error:
            raise ConfigError(f"Invalid run configuration: {error}") from error
