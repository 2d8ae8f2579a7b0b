import argparse
import json
from pathlib import Path

from ciphermatch.core.app import App
from ciphermatch.core.errors import MissingInputError, OracleMismatchError
from ciphermatch.flash.ifp_sim import InFlashAdder
from ciphermatch.he.bfv import EncryptMode, hom_add
from ciphermatch.search.matcher import (
    Adder,
    IndexMode,
    build_match_kit,
    prepare_database,
    prepare_query,
    run_search,
)
from ciphermatch.search.verify import random_case, verify_case
from ciphermatch.store.file_store import file_store
from ciphermatch.store.repos.database_repo import database_repo
from ciphermatch.store.repos.key_repo import key_repo
from ciphermatch.utils.logger import logger
from ciphermatch.utils.settings import settings

# --mode value -> (encryption mode, index generation mode)
MODES: dict[str, tuple[EncryptMode, IndexMode]] = {
    "client-decrypt": (EncryptMode.STANDARD, IndexMode.CLIENT_DECRYPT),
    "subtract": (EncryptMode.STANDARD, IndexMode.SUBTRACT),
    "paper-literal-encrypt": (EncryptMode.PAPER_LITERAL, IndexMode.CLIENT_DECRYPT),
}


class SearchCommands:
    def __init__(self, app: App):
        self.app = app

    def register(self) -> None:
        db_parser = self.app.add_command(
            "encrypt-db", self.encrypt_db, help="Pack and encrypt a database.", aliases=["prepare-db"]
        )
        db_parser.add_argument("input", type=Path)
        db_parser.add_argument("--public-key", type=Path, required=True)
        db_parser.add_argument("--out", type=Path, required=True, help="database manifest (.json)")
        self.add_mode_argument(db_parser)
        self.app.add_format_arguments(db_parser)

        query_parser = self.app.add_command(
            "prepare-query", self.prepare_query, help="Encrypt every shifted variant of a query."
        )
        query_parser.add_argument("input", type=Path)
        query_parser.add_argument("--public-key", type=Path, required=True)
        query_parser.add_argument("--out", type=Path, required=True, help="query manifest (.json)")
        self.add_mode_argument(query_parser)
        self.app.add_format_arguments(query_parser)

        search_parser = self.app.add_command("search", self.search, help="Search an encrypted database.")
        search_parser.add_argument("--db", type=Path, required=True, help="database manifest")
        search_parser.add_argument("--query", type=Path, required=True, help="query manifest")
        search_parser.add_argument("--secret-key", type=Path, required=True)
        search_parser.add_argument("--public-key", type=Path, default=None, help="needed by --mode subtract")
        search_parser.add_argument("--out", type=Path, default=None, help="results JSON (default: stdout)")
        search_parser.add_argument("--in-flash", action="store_true", help="route additions through the plane simulator")
        self.add_mode_argument(search_parser)

        verify_parser = self.app.add_command(
            "verify", self.verify, help="Check the encrypted pipeline against the plaintext oracle."
        )
        verify_parser.add_argument("--cases", type=int, default=100)
        verify_parser.add_argument("--max-db-bits", type=int, default=4096)
        verify_parser.add_argument("--out", type=Path, default=None, help="directory for the report")
        verify_parser.add_argument("--in-flash", action="store_true")
        self.add_mode_argument(verify_parser)
        self.app.add_params_argument(verify_parser)

    @staticmethod
    def add_mode_argument(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--mode", choices=sorted(MODES), default="client-decrypt")

    @staticmethod
    def adder(args: argparse.Namespace) -> Adder:
        return InFlashAdder().hom_add if args.in_flash else hom_add

    def encrypt_db(self, args: argparse.Namespace) -> int:
        encrypt_mode, _ = MODES[args.mode]
        pk = key_repo.load_public(args.public_key)
        bits = self.app.read_bits(args.input, args)

        db = prepare_database(bits, pk, pk.params, self.app.rng(args), encrypt_mode)
        outputs = database_repo.save_database(args.out, db)
        self.app.record_run(
            args.out.parent,
            params=pk.params,
            seed=args.seed,
            inputs=[args.input, args.public_key],
            outputs=outputs,
            extra={"mode": args.mode, "bit_len": db.bit_len, "ciphertexts": len(db.cts)},
        )

        logger.info(f"Encrypted {db.bit_len} bits into {len(db.cts)} ciphertext(s)")
        print(json.dumps({"manifest": str(outputs[0]), "ciphertexts": len(db.cts)}))
        return 0

    def prepare_query(self, args: argparse.Namespace) -> int:
        encrypt_mode, _ = MODES[args.mode]
        pk = key_repo.load_public(args.public_key)
        bits = self.app.read_bits(args.input, args)

        queries = prepare_query(bits, pk, pk.params, self.app.rng(args), encrypt_mode)
        outputs = database_repo.save_query(args.out, queries)
        self.app.record_run(
            args.out.parent,
            params=pk.params,
            seed=args.seed,
            inputs=[args.input, args.public_key],
            outputs=outputs,
            extra={"mode": args.mode, "query_bit_len": len(bits), "shifts": len(queries)},
        )

        logger.info(f"Prepared {len(queries)} shifted variant(s) of a {len(bits)}-bit query")
        print(json.dumps({"manifest": str(outputs[0]), "shifts": len(queries)}))
        return 0

    def search(self, args: argparse.Namespace) -> int:
        encrypt_mode, index_mode = MODES[args.mode]
        sk = key_repo.load_secret(args.secret_key)
        db = database_repo.load_database(args.db)
        queries = database_repo.load_query(args.query)

        if index_mode is IndexMode.SUBTRACT and args.public_key is None:
            raise MissingInputError("--mode subtract needs --public-key to encrypt the match polynomial")

        pk = key_repo.load_public(args.public_key) if args.public_key else None
        kit = build_match_kit(pk, self.app.rng(args), encrypt_mode) if pk else None

        found = run_search(db, queries, kit, sk, index_mode, self.adder(args), settings.search_workers)
        results = [m.as_dict() for m in found]

        inputs = [args.db, args.query, args.secret_key] + ([args.public_key] if args.public_key else [])
        if args.out is not None:
            out = file_store.write_json(args.out, results)
            self.app.record_run(
                args.out.parent, params=db.params, seed=args.seed, inputs=inputs, outputs=[out],
                extra={"mode": args.mode, "matches": len(results), "in_flash": args.in_flash},
            )
        else:
            print(json.dumps(results))

        logger.info(f"Search found {len(results)} match(es) across {len(queries)} shift(s)")
        return 0

    def verify(self, args: argparse.Namespace) -> int:
        encrypt_mode, index_mode = MODES[args.mode]
        params = self.app.he_params(args)
        rng = self.app.rng(args)

        reports: list[dict[str, object]] = []
        failures = 0

        for case in range(args.cases):
            db_bits, query_bits = random_case(rng, params, args.max_db_bits)
            outcome = verify_case(
                db_bits, query_bits, params, rng, encrypt_mode, index_mode, self.adder(args), settings.search_workers
            )
            reports.append({"case": case, **outcome.as_dict()})

            if not outcome.ok:
                failures += 1
                logger.warning(
                    f"case {case}: {len(outcome.missing)} missing, {len(outcome.unexpected)} unexpected, "
                    f"{outcome.hom_adds}/{outcome.expected_hom_adds} hom_add, "
                    f"{outcome.ring_multiplications} ring multiplication(s)"
                )

        summary = {"cases": args.cases, "failures": failures, "mode": args.mode}
        if args.out is not None:
            out = file_store.write_json(args.out / "verify-report.json", {"summary": summary, "cases": reports})
            self.app.record_run(args.out, params=params, seed=args.seed, inputs=[], outputs=[out], extra=summary)

        logger.info_dataset("Verify", summary)
        print(json.dumps(summary))

        if failures:
            raise OracleMismatchError(f"{failures} of {args.cases} case(s) disagree with the plaintext oracle")

        return 0
