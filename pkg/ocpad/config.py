from pathlib import Path
from typing import Any, Dict, List, Optional, Union, get_args, get_origin

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from ocpad.errors import DataContractError, UsageError
from ocpad.schemas.experiment import ExperimentConfig


class Settings(BaseSettings):
    """
    Process-level settings, read from OC_* environment variables and .env.
    """

    model_config = SettingsConfigDict(env_prefix="OC_", env_file=".env", extra="ignore")

    # Fallback for --seed
    SEED: Optional[int] = None

    # Application settings
    APP_NAME: str = "ocpad"
    LOG_LEVEL: str = "INFO"
    JOBS: int = 1
    OUTPUT_DIR: str = "runs"


# Create settings instance
settings = Settings()


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def _is_list_field(name: str) -> bool:
    return get_origin(ExperimentConfig.model_fields[name].annotation) is list


def _is_optional_field(name: str) -> bool:
    return type(None) in get_args(ExperimentConfig.model_fields[name].annotation)


def parse_config_text(text: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Parse a flat ``key = value`` document; ``#`` starts a comment.
    ``overrides`` (already typed) win over file values.
    """
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in ExperimentConfig.model_fields:
            raise UsageError(f"config line {number}: unknown key {key!r}")
        if key in values:
            raise UsageError(f"config line {number}: duplicate key {key!r}")
        if _is_optional_field(key) and value.lower() in ("", "none"):
            values[key] = None
        elif _is_list_field(key):
            values[key] = [v.strip() for v in value.split(",") if v.strip()]
        else:
            values[key] = value
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(p) for p in first["loc"])
        raise UsageError(f"invalid config value for {key!r}: {first['msg']}") from exc


def serialize_config(config: ExperimentConfig) -> str:
    lines = [f"{name} = {_format_value(getattr(config, name))}" for name in ExperimentConfig.model_fields]
    return "\n".join(lines) + "\n"


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Defaults < file < OC_SEED < explicit overrides (command-line flags).
    """
    text = ""
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise DataContractError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
    merged = {}
    env_seed = Settings().SEED
    if env_seed is not None:
        merged["seed"] = env_seed
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return parse_config_text(text, merged)


def config_keys() -> List[str]:
    return list(ExperimentConfig.model_fields)
