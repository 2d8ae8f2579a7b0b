import json
from typing import Annotated
from zoneinfo import ZoneInfo
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, NoDecode, SettingsConfigDict

from ciphermatch import ENV_FILE_PATH, COMMANDS_DIR_PATH, DEFAULT_CONFIG_DIR


class SettingsManager(BaseSettings):
    debug_mode: bool = Field(default=False)
    time_zone: ZoneInfo = Field(default=ZoneInfo("UTC"))
    config_dir: Path = Field(default=DEFAULT_CONFIG_DIR)
    default_seed: int = Field(default=0)
    ring_dimension: int = Field(default=1024)
    q_bits: int = Field(default=32)
    t_bits: int = Field(default=16)
    noise_stddev: float = Field(default=3.2)
    search_workers: int = Field(default=1, ge=1)
    defined_commands: list[str] = sorted([
        f"ciphermatch.commands.{p.name}"
        for p in Path(COMMANDS_DIR_PATH).iterdir()
        if p.is_dir() and (p / "__init__.py").exists()
    ])
    enabled_commands: Annotated[list[str], NoDecode] = Field(default_factory=list)

    model_config = SettingsConfigDict(
        env_prefix="CIPHERMATCH_",
        env_file=ENV_FILE_PATH,
        env_file_encoding="utf-8",
        extra="ignore",
        populate_by_name=True,
    )

    @field_validator("enabled_commands", mode="before")
    @classmethod
    def parse_enabled_commands(cls, v):
        if v is None or v == "":
            return []

        if isinstance(v, str):
            v = json.loads(v) if v.strip().startswith("[") else [p.strip() for p in v.split(",") if p.strip()]

        if not isinstance(v, (list, tuple, set)):
            raise TypeError(f"enabled_commands must be a JSON array or comma list, got {type(v).__name__}")

        return [
            item if item.startswith("ciphermatch.commands.") else f"ciphermatch.commands.{item}"
            for item in v
        ]

    @field_validator("enabled_commands")
    @classmethod
    def enabled_commands_must_exist(cls, enabled: list[str], info):
        defined: set[str] = set(info.data.get("defined_commands", []))
        invalid: set[str] = set([c for c in enabled if c not in defined])

        if invalid:
            raise ValueError(
                f"Unknown command groups in enabled_commands: {', '.join(sorted(invalid))}. "
                f"Available groups: {', '.join(sorted(defined))}"
            )

        return sorted(enabled or defined)

    @field_validator("config_dir", mode="before")
    @classmethod
    def make_config_dir_absolute(cls, v):
        if v is None or (isinstance(v, str) and v.strip() == ""):
            return DEFAULT_CONFIG_DIR

        return Path(v).expanduser().resolve()

    @field_validator("time_zone", mode="before")
    @classmethod
    def normalize_time_zone(cls, v):
        return ZoneInfo(v) if isinstance(v, str) else v

    @field_validator("ring_dimension")
    @classmethod
    def ring_dimension_is_power_of_two(cls, v: int) -> int:
        if v < 8 or v & (v - 1):
            raise ValueError(f"ring_dimension must be a power of two >= 8, got {v}")

        return v

    @property
    def active_commands(self) -> list[str]:
        return self.enabled_commands or self.defined_commands


settings = SettingsManager() # type: ignore
