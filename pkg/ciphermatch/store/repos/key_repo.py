from pathlib import Path

from ciphermatch.he.bfv import (
    PublicKey,
    SecretKey,
    public_key_from_bytes,
    public_key_to_bytes,
    secret_key_from_bytes,
    secret_key_to_bytes,
)
from ciphermatch.store.file_store import FileStore, file_store

SECRET_KEY_FILE = "secret.key"
PUBLIC_KEY_FILE = "public.key"


class KeyRepo:
    def __init__(self, store: FileStore):
        self.store = store

    def save_pair(self, directory: Path, sk: SecretKey, pk: PublicKey) -> list[Path]:
        return [
            self.store.write_bytes(directory / SECRET_KEY_FILE, secret_key_to_bytes(sk)),
            self.store.write_bytes(directory / PUBLIC_KEY_FILE, public_key_to_bytes(pk)),
        ]

    def load_secret(self, path: Path) -> SecretKey:
        return secret_key_from_bytes(self.store.read_bytes(path))

    def load_public(self, path: Path) -> PublicKey:
        return public_key_from_bytes(self.store.read_bytes(path))


key_repo = KeyRepo(file_store)
