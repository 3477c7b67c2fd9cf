"""Configuration management for lvolterra."""

from __future__ import annotations

import json
import os
from collections.abc import Mapping
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

from lvolterra.errors import ConfigError

# Default configuration directory
DEFAULT_CONFIG_DIR = Path.home() / ".config" / "lvolterra"
DEFAULT_DB_PATH = DEFAULT_CONFIG_DIR / "ensembles.db"
DEFAULT_CONFIG_PATH = DEFAULT_CONFIG_DIR / "config.json"

# LVOLTERRA_TOL_SIMPLEX, LVOLTERRA_TOL_ZERO, ...
ENV_PREFIX = "LVOLTERRA_TOL_"


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances in effect for every operation.

    Attributes:
        simplex: Allowed coordinate negativity and sum deviation of a simplex point.
        row: Allowed deviation of a pair-row sum of the heredity tensor from 1.
        zero: Threshold below which a coefficient or coordinate counts as zero.
        fixed: Residual bound for a certified fixed point.
        conv: Step size below which an orbit counts as stagnant.
        cycle: Distance bound used when comparing an orbit with its shift.
    """

    simplex: float = 1e-12
    row: float = 1e-12
    zero: float = 1e-14
    fixed: float = 1e-10
    conv: float = 1e-12
    cycle: float = 1e-9

    def as_dict(self) -> dict[str, float]:
        """Return the tolerances as a plain mapping."""
        return asdict(self)

    def with_overrides(self, overrides: Mapping[str, Any], source: str) -> Tolerances:
        """Return a copy with the given fields replaced.

        Args:
            overrides: Field name to new value.
            source: Where the values came from, used in error messages.

        Raises:
            ConfigError: If a name is unknown or a value is not a positive number.
        """
        known = {f.name for f in fields(self)}
        changes: dict[str, float] = {}
        for name, raw in overrides.items():
            if name not in known:
                raise ConfigError(f"{source}: unknown tolerance {name!r}")
            try:
                value = float(raw)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"{source}: tolerance {name!r} is not a number: {raw!r}"
                ) from None
            if not value > 0:
                raise ConfigError(f"{source}: tolerance {name!r} must be positive, got {value}")
            changes[name] = value
        return replace(self, **changes)


class Config:
    """Application configuration."""

    def __init__(
        self, config_path: Path | None = None, environ: Mapping[str, str] | None = None
    ) -> None:
        self.config_path = config_path or DEFAULT_CONFIG_PATH
        self._environ = os.environ if environ is None else environ
        self._data: dict[str, Any] = {}
        self._load()

    def _load(self) -> None:
        """Load configuration from file."""
        if self.config_path.exists():
            try:
                with open(self.config_path) as f:
                    self._data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{self.config_path}: line {e.lineno}: {e.msg}") from e
        else:
            self._data = {}

    def _save(self) -> None:
        """Save configuration to file."""
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, "w") as f:
            json.dump(self._data, f, indent=2)

    @property
    def tolerance_overrides(self) -> dict[str, float]:
        """Get the tolerances stored in the configuration file."""
        return dict(self._data.get("tolerances", {}))

    def set_tolerance(self, name: str, value: float) -> None:
        """Store a tolerance override in the configuration file."""
        Tolerances().with_overrides({name: value}, str(self.config_path))
        overrides = self.tolerance_overrides
        overrides[name] = float(value)
        self._data["tolerances"] = overrides
        self._save()

    @property
    def tolerances(self) -> Tolerances:
        """Get the effective tolerances: defaults, then file, then environment."""
        tolerances = Tolerances().with_overrides(
            self.tolerance_overrides, str(self.config_path)
        )
        for key in sorted(self._environ):
            if key.startswith(ENV_PREFIX):
                name = key[len(ENV_PREFIX):].lower()
                tolerances = tolerances.with_overrides({name: self._environ[key]}, key)
        return tolerances

    @property
    def db_path(self) -> Path:
        """Get the ensemble database path."""
        path_str = self._data.get("db_path")
        if path_str:
            return Path(path_str)
        return DEFAULT_DB_PATH

    @db_path.setter
    def db_path(self, value: Path) -> None:
        """Set the ensemble database path."""
        self._data["db_path"] = str(value)
        self._save()


# Global config instance
_config: Config | None = None


def get_config() -> Config:
    """Get the global configuration instance."""
    global _config
    if _config is None:
        _config = Config()
    return _config


def get_tolerances(tolerances: Tolerances | None = None) -> Tolerances:
    """Return the given tolerances, or the global ones when None."""
    if tolerances is not None:
        return tolerances
    return get_config().tolerances
