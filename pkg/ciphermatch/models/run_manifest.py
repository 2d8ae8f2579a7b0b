from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime


@dataclass(slots=True, frozen=True)
class RunManifest:
    command: list[str]
    params: dict[str, int | float]
    seed: int | None
    timestamp: datetime
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    extra: dict[str, object] = field(default_factory=dict)
