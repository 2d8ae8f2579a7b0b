from __future__ import annotations

from datetime import datetime
from pathlib import Path

from dateutil import parser as date_parser

from ciphermatch.core.errors import FormatError
from ciphermatch.models.he_params import HeParams
from ciphermatch.models.run_manifest import RunManifest
from ciphermatch.store.file_store import FileStore, file_store
from ciphermatch.utils.helpers import sha256_file
from ciphermatch.utils.settings import settings

RUN_MANIFEST_FILE = "run-manifest.json"


class ManifestRepo:
    def __init__(self, store: FileStore):
        self.store = store

    def build(
        self,
        *,
        command: list[str],
        params: HeParams | None,
        seed: int | None,
        inputs: list[Path],
        outputs: list[Path],
        extra: dict[str, object] | None = None,
    ) -> RunManifest:
        return RunManifest(
            command=list(command),
            params=params.as_dict() if params else {},
            seed=seed,
            timestamp=datetime.now(tz=settings.time_zone),
            inputs={str(p): sha256_file(p) for p in inputs},
            outputs=[str(p) for p in outputs],
            extra=extra or {},
        )

    def save(self, directory: Path, manifest: RunManifest) -> Path:
        return self.store.write_json(
            directory / RUN_MANIFEST_FILE,
            {
                "command": manifest.command,
                "params": manifest.params,
                "seed": manifest.seed,
                "timestamp": manifest.timestamp.isoformat(),
                "inputs": manifest.inputs,
                "outputs": manifest.outputs,
                "extra": manifest.extra,
            },
        )

    def load(self, path: Path) -> RunManifest:
        raw = self.store.read_json(path)

        try:
            return RunManifest(
                command=list(raw["command"]),
                params=dict(raw["params"]),
                seed=raw["seed"],
                timestamp=date_parser.isoparse(raw["timestamp"]),
                inputs=dict(raw.get("inputs", {})),
                outputs=list(raw.get("outputs", [])),
                extra=dict(raw.get("extra", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"{path} is not a valid run manifest: {e}") from e


manifest_repo = ManifestRepo(file_store)
