import argparse
import json
from pathlib import Path

from ciphermatch.core.app import App
from ciphermatch.search.packing import footprint_report, pack, to_plaintexts, unpack
from ciphermatch.store.file_store import file_store
from ciphermatch.store.repos.plaintext_repo import plaintext_repo
from ciphermatch.utils.logger import logger


class PackingCommands:
    def __init__(self, app: App):
        self.app = app

    def register(self) -> None:
        pack_parser = self.app.add_command("pack", self.pack, help="Pack a bitstring into plaintext polynomials.")
        pack_parser.add_argument("input", type=Path)
        pack_parser.add_argument("--out", type=Path, required=True, help="packed plaintext file")
        self.app.add_format_arguments(pack_parser)
        self.app.add_params_argument(pack_parser)

        unpack_parser = self.app.add_command("unpack", self.unpack, help="Recover the bitstring from a packed file.")
        unpack_parser.add_argument("input", type=Path)
        unpack_parser.add_argument("--out", type=Path, required=True)
        unpack_parser.add_argument("--text", action="store_true", help="write '0'/'1' text instead of raw bytes")

        footprint_parser = self.app.add_command(
            "footprint", self.footprint, help="Report the encrypted memory footprint of a bitstring."
        )
        footprint_parser.add_argument("input", type=Path)
        self.app.add_format_arguments(footprint_parser)
        self.app.add_params_argument(footprint_parser)

    def pack(self, args: argparse.Namespace) -> int:
        params = self.app.he_params(args)
        bits = self.app.read_bits(args.input, args)
        plaintexts = to_plaintexts(pack(bits, params), params)

        out = plaintext_repo.save(args.out, plaintexts, len(bits), params)
        report = footprint_report(bits, params)
        self.app.record_run(
            args.out.parent, params=params, seed=None, inputs=[args.input], outputs=[out], extra=report.as_dict()
        )

        logger.info(f"Packed {len(bits)} bits into {len(plaintexts)} plaintext polynomial(s)")
        print(json.dumps(report.as_dict()))
        return 0

    def unpack(self, args: argparse.Namespace) -> int:
        plaintexts, bit_len, params = plaintext_repo.load(args.input)
        bits = unpack(plaintexts, bit_len, params)

        if args.text:
            out = file_store.write_text(args.out, bits.to_text())
        else:
            if bit_len % 8:
                logger.warning(f"{bit_len} bits do not fill whole bytes; the last byte is zero-padded")
            out = file_store.write_bytes(args.out, bits.to_bytes())

        self.app.record_run(args.out.parent, params=params, seed=None, inputs=[args.input], outputs=[out])
        logger.info(f"Unpacked {bit_len} bits to {out}")
        return 0

    def footprint(self, args: argparse.Namespace) -> int:
        report = footprint_report(self.app.read_bits(args.input, args), self.app.he_params(args))
        logger.info_dataset("Footprint", report.as_dict())
        print(json.dumps(report.as_dict()))
        return 0
