from __future__ import annotations

import argparse
import importlib
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ciphermatch.core.errors import CipherMatchError, ParameterError
from ciphermatch.models.he_params import HeParams
from ciphermatch.search.packing import BitString
from ciphermatch.store.file_store import file_store
from ciphermatch.store.repos.manifest_repo import manifest_repo
from ciphermatch.utils.logger import logger
from ciphermatch.utils.settings import settings

Handler = Callable[[argparse.Namespace], int]


class App:
    def __init__(self, prog: str = "ciphermatch") -> None:
        self.parser = argparse.ArgumentParser(
            prog=prog,
            description="Addition-only encrypted exact matching, latch-level in-flash simulation and cost models.",
        )
        self.subparsers = self.parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
        self.argv: list[str] = []
        self._loaded = False

    def add_command(self, name: str, handler: Handler, help: str, aliases: Sequence[str] = ()) -> argparse.ArgumentParser:
        parser = self.subparsers.add_parser(name, help=help, description=help, aliases=list(aliases))
        parser.add_argument("--seed", type=int, default=settings.default_seed, help="seed for every random draw")
        parser.set_defaults(handler=handler)
        return parser

    def setup(self) -> None:
        if self._loaded:
            return

        logger.debug("Running setup...")
        logger.log_settings(settings)

        if not settings.active_commands:
            logger.error("No command groups to load! Enable one in your .env file.")

        for ext in settings.active_commands:
            try:
                importlib.import_module(ext).setup(self)
                logger.debug(f'- "{ext}" (success)')
            except Exception as e:
                logger.warning(f'- "{ext}" (failure: {e})')

        self._loaded = True

    def run(self, argv: Sequence[str] | None = None) -> int:
        self.setup()
        args = self.parser.parse_args(argv)
        self.argv = list(argv) if argv is not None else sys.argv[1:]

        logger.info(f'Running "{args.command}"...')
        try:
            code = args.handler(args)
        except CipherMatchError as e:
            logger.error(f"{type(e).__name__}: {e}")
            return e.exit_code
        except Exception as e:
            logger.error(f"Unexpected failure: {type(e).__name__}: {e}")
            return 1

        logger.info(f'"{args.command}" finished with exit code {code}.')
        return code

    # ------------------------------------------------------------------
    # Shared argument handling for command groups
    # ------------------------------------------------------------------

    @staticmethod
    def add_params_argument(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--params", type=Path, default=None, help="JSON file with n, q_bits, t_bits, noise_stddev")

    @staticmethod
    def add_format_arguments(parser: argparse.ArgumentParser) -> None:
        group = parser.add_mutually_exclusive_group()
        group.add_argument("--text", action="store_true", help="input is ASCII '0'/'1' text")
        group.add_argument("--dna", action="store_true", help="input is an ACGT sequence, two bits per base")

    @staticmethod
    def rng(args: argparse.Namespace) -> np.random.Generator:
        return np.random.default_rng(args.seed)

    @staticmethod
    def he_params(args: argparse.Namespace) -> HeParams:
        defaults = HeParams.from_settings(settings).as_dict()
        if getattr(args, "params", None) is None:
            return HeParams(**defaults)

        overrides = file_store.read_json(args.params)
        if not isinstance(overrides, dict):
            raise ParameterError(f"{args.params} must hold a JSON object")

        unknown = set(overrides) - set(defaults)
        if unknown:
            raise ParameterError(f"{args.params} has unknown parameter(s): {', '.join(sorted(unknown))}")

        return HeParams(**{**defaults, **overrides})

    @staticmethod
    def read_bits(path: Path, args: argparse.Namespace) -> BitString:
        data = file_store.read_bytes(path)

        if getattr(args, "text", False):
            return BitString.from_text(data.decode("ascii", errors="replace"))
        if getattr(args, "dna", False):
            return BitString.from_dna(data.decode("ascii", errors="replace"))

        return BitString.from_bytes(data)

    def record_run(
        self,
        directory: Path,
        *,
        params: HeParams | None,
        seed: int | None,
        inputs: list[Path],
        outputs: list[Path],
        extra: dict[str, object] | None = None,
    ) -> Path:
        manifest = manifest_repo.build(
            command=["ciphermatch", *self.argv],
            params=params,
            seed=seed,
            inputs=inputs,
            outputs=outputs,
            extra=extra,
        )
        path = manifest_repo.save(directory, manifest)
        logger.debug(f"Run manifest written to {path}")
        return path
