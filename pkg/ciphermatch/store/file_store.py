import json
from pathlib import Path
from typing import Any

from ciphermatch.core.errors import FormatError, MissingInputError


class FileStore:
    def read_bytes(self, path: Path) -> bytes:
        try:
            return path.read_bytes()
        except FileNotFoundError as e:
            raise MissingInputError(f"file not found: {path}") from e
        except IsADirectoryError as e:
            raise MissingInputError(f"expected a file, got a directory: {path}") from e

    def write_bytes(self, path: Path, data: bytes) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        return path

    def read_json(self, path: Path) -> Any:
        raw = self.read_bytes(path)

        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise FormatError(f"{path} is not valid JSON: {e}") from e

    def write_json(self, path: Path, payload: Any) -> Path:
        return self.write_bytes(path, (json.dumps(payload, indent=2) + "\n").encode("utf-8"))

    def write_text(self, path: Path, text: str) -> Path:
        return self.write_bytes(path, text.encode("utf-8"))


file_store = FileStore()
