import argparse
import json
from pathlib import Path

from ciphermatch.core.app import App
from ciphermatch.he.bfv import keygen
from ciphermatch.store.repos.key_repo import key_repo
from ciphermatch.utils.logger import logger


class KeysCommands:
    def __init__(self, app: App):
        self.app = app

    def register(self) -> None:
        parser = self.app.add_command("keygen", self.keygen, help="Generate a secret/public key pair.")
        parser.add_argument("--out", type=Path, required=True, help="directory for secret.key and public.key")
        self.app.add_params_argument(parser)

    def keygen(self, args: argparse.Namespace) -> int:
        params = self.app.he_params(args)
        sk, pk = keygen(params, self.app.rng(args))

        outputs = key_repo.save_pair(args.out, sk, pk)
        self.app.record_run(args.out, params=params, seed=args.seed, inputs=[], outputs=outputs)

        logger.info(f"Keys written to {args.out}")
        print(json.dumps({"secret_key": str(outputs[0]), "public_key": str(outputs[1])}))
        return 0
