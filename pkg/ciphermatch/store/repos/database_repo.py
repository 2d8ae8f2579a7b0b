from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, ValidationError

from ciphermatch.core.errors import CipherMatchError, FormatError
from ciphermatch.models.he_params import HeParams
from ciphermatch.search.matcher import EncryptedDatabase, PreparedQuery
from ciphermatch.store.file_store import FileStore, file_store
from ciphermatch.store.repos.ciphertext_repo import CiphertextRepo, ciphertext_repo
from ciphermatch.utils.helpers import sha256_bytes


class ParamsModel(BaseModel):
    n: int
    q_bits: int
    t_bits: int
    noise_stddev: float

    @classmethod
    def from_params(cls, params: HeParams) -> ParamsModel:
        return cls(**params.as_dict())

    def to_params(self) -> HeParams:
        try:
            return HeParams(self.n, self.q_bits, self.t_bits, self.noise_stddev)
        except CipherMatchError as e:
            raise FormatError(f"manifest carries invalid parameters: {e}") from e


class DatabaseManifest(BaseModel):
    kind: Literal["database"] = "database"
    params: ParamsModel
    bit_len: int = Field(ge=1)
    polynomial_count: int = Field(ge=1)
    ciphertext_file: str
    sha256: str


class QueryManifest(BaseModel):
    kind: Literal["query"] = "query"
    params: ParamsModel
    query_bit_len: int = Field(ge=1)
    period: int = Field(ge=1)
    shifts: list[int]
    ciphertext_file: str
    sha256: str


class DatabaseRepo:
    """
    Encrypted databases and prepared queries: a JSON manifest next to a
    file of concatenated ciphertexts.
    """

    def __init__(self, store: FileStore, ciphertexts: CiphertextRepo):
        self.store = store
        self.ciphertexts = ciphertexts

    @staticmethod
    def ciphertext_path(manifest_path: Path) -> Path:
        return manifest_path.with_suffix(".ct")

    def _write_payload(self, manifest_path: Path, cts) -> tuple[Path, str]:
        ct_path = self.ciphertexts.save(self.ciphertext_path(manifest_path), cts)
        return ct_path, sha256_bytes(self.store.read_bytes(ct_path))

    def _read_payload(self, manifest_path: Path, file_name: str, digest: str):
        ct_path = manifest_path.parent / file_name
        if sha256_bytes(self.store.read_bytes(ct_path)) != digest:
            raise FormatError(f"{ct_path} does not match the digest recorded in {manifest_path}")
        return self.ciphertexts.load(ct_path)

    def _validate(self, model: type[BaseModel], manifest_path: Path):
        try:
            return model.model_validate(self.store.read_json(manifest_path))
        except ValidationError as e:
            raise FormatError(f"{manifest_path} is not a valid {model.__name__}: {e}") from e

    def save_database(self, manifest_path: Path, db: EncryptedDatabase) -> list[Path]:
        ct_path, digest = self._write_payload(manifest_path, db.cts)
        manifest = DatabaseManifest(
            params=ParamsModel.from_params(db.params),
            bit_len=db.bit_len,
            polynomial_count=len(db.cts),
            ciphertext_file=ct_path.name,
            sha256=digest,
        )
        return [self.store.write_json(manifest_path, manifest.model_dump()), ct_path]

    def load_database(self, manifest_path: Path) -> EncryptedDatabase:
        manifest: DatabaseManifest = self._validate(DatabaseManifest, manifest_path)
        cts = self._read_payload(manifest_path, manifest.ciphertext_file, manifest.sha256)

        if len(cts) != manifest.polynomial_count:
            raise FormatError(f"{manifest_path} lists {manifest.polynomial_count} ciphertexts, file holds {len(cts)}")

        return EncryptedDatabase(tuple(cts), manifest.bit_len, manifest.params.to_params())

    def save_query(self, manifest_path: Path, queries: list[PreparedQuery]) -> list[Path]:
        if not queries:
            raise FormatError("no prepared query variants to save")

        ct_path, digest = self._write_payload(manifest_path, [q.ct for q in queries])
        manifest = QueryManifest(
            params=ParamsModel.from_params(queries[0].ct.params),
            query_bit_len=queries[0].query_bit_len,
            period=queries[0].period,
            shifts=[q.shift for q in queries],
            ciphertext_file=ct_path.name,
            sha256=digest,
        )
        return [self.store.write_json(manifest_path, manifest.model_dump()), ct_path]

    def load_query(self, manifest_path: Path) -> list[PreparedQuery]:
        manifest: QueryManifest = self._validate(QueryManifest, manifest_path)
        cts = self._read_payload(manifest_path, manifest.ciphertext_file, manifest.sha256)

        if len(cts) != len(manifest.shifts):
            raise FormatError(f"{manifest_path} lists {len(manifest.shifts)} shifts, file holds {len(cts)} ciphertexts")

        return [
            PreparedQuery(shift, ct, manifest.query_bit_len, manifest.period)
            for shift, ct in zip(manifest.shifts, cts)
        ]


database_repo = DatabaseRepo(file_store, ciphertext_repo)
