import json

import numpy as np
import pytest

from ciphermatch.core.errors import FormatError, MissingInputError
from ciphermatch.search.matcher import prepare_database, prepare_query
from ciphermatch.search.packing import BitString, pack, to_plaintexts
from ciphermatch.store.file_store import FileStore
from ciphermatch.store.repos.ciphertext_repo import CiphertextRepo
from ciphermatch.store.repos.database_repo import DatabaseRepo
from ciphermatch.store.repos.key_repo import KeyRepo
from ciphermatch.store.repos.manifest_repo import RUN_MANIFEST_FILE, ManifestRepo
from ciphermatch.store.repos.plaintext_repo import PlaintextRepo


@pytest.fixture
def store():
    return FileStore()


@pytest.fixture
def database_repo(store):
    return DatabaseRepo(store, CiphertextRepo(store))


def test_missing_file_is_a_missing_input(store, tmp_path):
    with pytest.raises(MissingInputError):
        store.read_bytes(tmp_path / "nope.bin")


def test_invalid_json_is_a_format_error(store, tmp_path):
    path = store.write_bytes(tmp_path / "bad.json", b"{not json")
    with pytest.raises(FormatError):
        store.read_json(path)


def test_key_pair_round_trip(store, keys, tmp_path):
    sk, pk = keys
    repo = KeyRepo(store)

    secret_path, public_path = repo.save_pair(tmp_path / "keys", sk, pk)

    assert repo.load_secret(secret_path).s == sk.s
    assert repo.load_public(public_path).pk1 == pk.pk1


def test_database_round_trip(database_repo, small_params, keys, rng, tmp_path):
    _, pk = keys
    db = prepare_database(BitString(rng.integers(0, 2, size=2100, dtype=np.uint8)), pk, small_params, rng)

    manifest_path, ct_path = database_repo.save_database(tmp_path / "db.json", db)
    loaded = database_repo.load_database(manifest_path)

    assert ct_path.suffix == ".ct"
    assert loaded.bit_len == 2100
    assert loaded.params == small_params
    assert [ct.c0 for ct in loaded.cts] == [ct.c0 for ct in db.cts]

    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    assert manifest["polynomial_count"] == 3
    assert manifest["params"]["n"] == 64


def test_query_round_trip(database_repo, small_params, keys, rng, tmp_path):
    _, pk = keys
    queries = prepare_query(BitString.from_text("0110"), pk, small_params, rng)

    paths = database_repo.save_query(tmp_path / "query.json", queries)
    loaded = database_repo.load_query(paths[0])

    assert [(q.shift, q.period, q.query_bit_len) for q in loaded] == [(0, 4, 4), (1, 4, 4), (2, 4, 4), (3, 4, 4)]
    assert [q.ct.c1 for q in loaded] == [q.ct.c1 for q in queries]


def test_tampered_ciphertexts_are_rejected(database_repo, small_params, keys, rng, tmp_path):
    _, pk = keys
    db = prepare_database(BitString.from_text("1" * 100), pk, small_params, rng)
    manifest_path, ct_path = database_repo.save_database(tmp_path / "db.json", db)

    data = bytearray(ct_path.read_bytes())
    data[-1] ^= 0xFF
    ct_path.write_bytes(bytes(data))

    with pytest.raises(FormatError):
        database_repo.load_database(manifest_path)


def test_wrong_manifest_kind_is_rejected(database_repo, small_params, keys, rng, tmp_path):
    _, pk = keys
    queries = prepare_query(BitString.from_text("01"), pk, small_params, rng)
    manifest_path, _ = database_repo.save_query(tmp_path / "query.json", queries)

    with pytest.raises(FormatError):
        database_repo.load_database(manifest_path)


def test_plaintext_file_round_trip(store, small_params, rng, tmp_path):
    repo = PlaintextRepo(store)
    bits = BitString(rng.integers(0, 2, size=1500, dtype=np.uint8))
    plaintexts = to_plaintexts(pack(bits, small_params), small_params)

    path = repo.save(tmp_path / "db.pt", plaintexts, len(bits), small_params)
    loaded, bit_len, params = repo.load(path)

    assert bit_len == 1500
    assert params == small_params
    assert loaded == plaintexts


def test_plaintext_file_rejects_trailing_bytes(small_params):
    plaintexts = to_plaintexts(pack(BitString.from_text("1"), small_params), small_params)
    data = PlaintextRepo.encode(plaintexts, 1, small_params)

    with pytest.raises(FormatError):
        PlaintextRepo.decode(data + b"\x00")


def test_run_manifest_round_trip(store, small_params, tmp_path):
    source = store.write_bytes(tmp_path / "input.bin", b"abc")
    repo = ManifestRepo(store)

    manifest = repo.build(
        command=["ciphermatch", "pack", str(source)],
        params=small_params,
        seed=7,
        inputs=[source],
        outputs=[tmp_path / "out.pt"],
    )
    path = repo.save(tmp_path, manifest)
    loaded = repo.load(path)

    assert path.name == RUN_MANIFEST_FILE
    assert loaded.inputs == {str(source): "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"}
    assert loaded.seed == 7
    assert loaded.params["n"] == 64
    assert loaded.timestamp == manifest.timestamp


def test_run_manifest_needs_existing_inputs(store, tmp_path):
    with pytest.raises(MissingInputError):
        ManifestRepo(store).build(command=[], params=None, seed=None, inputs=[tmp_path / "gone"], outputs=[])
