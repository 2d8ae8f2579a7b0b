import argparse
import json
from pathlib import Path

import numpy as np
import pandas as pd

from ciphermatch.core.app import App
from ciphermatch.core.errors import ParameterError
from ciphermatch.cost.config import load_cost_config
from ciphermatch.cost.cost_model import SystemId, overlap_report, published_ledger, sweep
from ciphermatch.cost.presets import PRESETS, preset_workloads
from ciphermatch.models.he_params import HeParams
from ciphermatch.models.workload import Workload
from ciphermatch.search.packing import BitString, footprint_report
from ciphermatch.search.verify import verify_case
from ciphermatch.store.file_store import file_store
from ciphermatch.utils.logger import logger

FUNCTIONAL_COLUMNS = ["ciphertexts", "hom_adds", "matches", "oracle_ok"]


class BenchCommands:
    def __init__(self, app: App):
        self.app = app

    def register(self) -> None:
        parser = self.app.add_command(
            "bench", self.bench, help="Analytic cost sweep at full scale plus functional runs at desk scale."
        )
        parser.add_argument("--workload", choices=sorted(PRESETS), default="dna")
        parser.add_argument("--cost-params", type=Path, default=None, help="cost-model JSON (default: config dir)")
        self.app.add_params_argument(parser)
        parser.add_argument("--out", type=Path, required=True, help=".csv or .json")
        parser.add_argument("--desk-bits", type=int, default=1 << 15, help="plaintext database size of functional runs")
        parser.add_argument("--desk-queries", type=int, default=2, help="queries per functional run when the preset has many")
        parser.add_argument("--skip-functional", action="store_true")

    def bench(self, args: argparse.Namespace) -> int:
        if args.out.suffix not in (".csv", ".json"):
            raise ParameterError(f"--out must end in .csv or .json, got {args.out.name}")

        config = load_cost_config(args.cost_params)
        workloads = preset_workloads(args.workload)

        analytic = sweep(workloads, list(SystemId), config)
        analytic.insert(0, "mode", "analytic")

        frames = [analytic]
        if not args.skip_functional:
            he_params = self.app.he_params(args)
            frames.append(self.functional_rows(workloads, he_params, args))

        table = pd.concat(frames, ignore_index=True)
        ledger = published_ledger(config)
        overlap = overlap_report(config)

        for name, entry in overlap.items():
            logger.info(f"{name}: {entry['latency_ns']:g} ns vs t_read {entry['t_read_ns']:g} ns, overlapped={entry['overlapped']}")

        if args.out.suffix == ".csv":
            out = file_store.write_text(args.out, table.to_csv(index=False))
        else:
            out = file_store.write_json(
                args.out,
                {
                    "workload": args.workload,
                    "rows": json.loads(table.to_json(orient="records")),
                    "ledger": ledger,
                    "overlap": overlap,
                },
            )

        inputs = [p for p in (args.cost_params, args.params) if p is not None]
        self.app.record_run(
            args.out.parent, params=None, seed=args.seed, inputs=inputs, outputs=[out],
            extra={"workload": args.workload, "rows": len(table)},
        )

        logger.info(f"Bench wrote {len(table)} row(s) to {out}")
        return 0

    def functional_rows(self, workloads: list[Workload], params: HeParams, args: argparse.Namespace) -> pd.DataFrame:
        """
        Run the real encrypted pipeline once per distinct query size.
        Rows carry operation counts, never wall-clock times, so the table is
        reproducible under a fixed seed.
        """
        rng = self.app.rng(args)
        rows: list[dict] = []

        for query_bits in sorted({w.query_bits for w in workloads}):
            if query_bits > min(params.plaintext_bits, args.desk_bits):
                logger.warning(f"skipping functional run: {query_bits}-bit query does not fit the desk parameters")
                continue

            queries = 1 if all(w.num_queries == 1 for w in workloads) else args.desk_queries
            hom_adds = matches = 0
            ok = True

            for _ in range(queries):
                db = rng.integers(0, 2, size=args.desk_bits, dtype=np.uint8)
                query = rng.integers(0, 2, size=query_bits, dtype=np.uint8)
                db[:query_bits] = query

                outcome = verify_case(BitString(db), BitString(query), params, rng)
                hom_adds += outcome.hom_adds
                matches += len(outcome.found)
                ok = ok and outcome.ok

            footprint = footprint_report(BitString(np.zeros(args.desk_bits, dtype=np.uint8)), params)
            rows.append({
                "mode": "functional",
                "system": "desk",
                "db_bytes": footprint.encrypted_bytes,
                "query_bits": query_bits,
                "num_queries": queries,
                "ciphertexts": footprint.polynomials,
                "hom_adds": hom_adds,
                "matches": matches,
                "oracle_ok": ok,
            })

        return pd.DataFrame(rows, columns=["mode", "system", "db_bytes", "query_bits", "num_queries", *FUNCTIONAL_COLUMNS])
