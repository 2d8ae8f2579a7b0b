from pathlib import Path
from typing import Sequence

from ciphermatch.he.bfv import Ciphertext, ciphertext_from_bytes, ciphertext_to_bytes
from ciphermatch.store.file_store import FileStore, file_store


class CiphertextRepo:
    """Ciphertexts stored back to back in one file."""

    def __init__(self, store: FileStore):
        self.store = store

    def save(self, path: Path, cts: Sequence[Ciphertext]) -> Path:
        return self.store.write_bytes(path, b"".join(ciphertext_to_bytes(ct) for ct in cts))

    def load(self, path: Path) -> list[Ciphertext]:
        data = memoryview(self.store.read_bytes(path))
        cts: list[Ciphertext] = []

        offset = 0
        while offset < len(data):
            ct, offset = ciphertext_from_bytes(data, offset)
            cts.append(ct)

        return cts


ciphertext_repo = CiphertextRepo(file_store)
