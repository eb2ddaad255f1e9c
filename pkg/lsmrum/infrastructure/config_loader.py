import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..domain.contracts.config import (
    ConfigLoaderContract,
    EngineConfig,
    parse_flags,
)
from ..domain.curve import Curve

ENV_PREFIX = "RUM_"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigLoaderError(Exception):
    pass


class EngineConfigLoader(ConfigLoaderContract):
    """Build an EngineConfig from defaults, a config file, RUM_* env vars and overrides.

    The file is either a YAML mapping or flat ``key=value`` lines; later
    layers win.
    """

    def __init__(self, environ: Mapping[str, str] | None = None) -> None:
        self._environ = os.environ if environ is None else environ

    def load(
        self,
        path: Path | None = None,
        overrides: Mapping[str, Any] | None = None,
    ) -> EngineConfig:
        values: dict[str, Any] = {}
        if path is not None:
            values.update(self._read_file(Path(path)))
        values.update(self._read_env())
        if overrides:
            values.update({k: v for k, v in overrides.items() if v is not None})

        known = set(EngineConfig.field_names())
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigLoaderError(
                f"Unknown config key(s): {', '.join(unknown)}. "
                f"Available: {', '.join(sorted(known))}"
            )

        coerced = {name: self._coerce(name, raw) for name, raw in values.items()}
        try:
            return EngineConfig(**coerced)
        except ValueError as e:
            raise ConfigLoaderError(str(e)) from e

    def _read_file(self, path: Path) -> dict[str, Any]:
        if not path.exists():
            raise ConfigLoaderError(f"Config file not found: {path}")

        text = path.read_text()
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError:
            data = None

        if isinstance(data, dict):
            return {str(k): v for k, v in data.items()}
        return self._parse_key_values(text, path)

    def _parse_key_values(self, text: str, path: Path) -> dict[str, Any]:
        values: dict[str, Any] = {}
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigLoaderError(
                    f"{path}:{number}: expected 'key=value', got '{line}'"
                )
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
        return values

    def _read_env(self) -> dict[str, str]:
        values = {}
        for name in EngineConfig.field_names():
            raw = self._environ.get(ENV_PREFIX + name.upper())
            if raw is not None and raw != "":
                values[name] = raw
        return values

    def _coerce(self, name: str, raw: Any) -> Any:
        kind = {f.name: f.type for f in fields(EngineConfig)}[name]
        try:
            if name == "cleaning_flags":
                return parse_flags(raw)
            if name == "curve":
                return raw if isinstance(raw, Curve) else Curve(str(raw).strip().lower())
            if name == "world":
                return self._coerce_world(raw)
            if kind is bool or kind == "bool":
                return self._coerce_bool(raw)
            if isinstance(raw, bool):
                raise ValueError("expected an integer")
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError("expected an integer")
            return int(raw)
        except (TypeError, ValueError) as e:
            raise ConfigLoaderError(f"Invalid value for {name}: {raw!r} ({e})") from e

    def _coerce_bool(self, raw: Any) -> bool:
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in _TRUE:
            return True
        if text in _FALSE:
            return False
        raise ValueError("expected true or false")

    def _coerce_world(self, raw: Any) -> tuple[float, float, float, float]:
        parts = raw.split(",") if isinstance(raw, str) else list(raw)
        if len(parts) != 4:
            raise ValueError("expected four numbers: min_x, min_y, max_x, max_y")
        min_x, min_y, max_x, max_y = (float(p) for p in parts)
        return (min_x, min_y, max_x, max_y)
