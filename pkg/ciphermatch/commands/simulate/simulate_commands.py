import argparse
import json
from pathlib import Path

import numpy as np

from ciphermatch.core.app import App
from ciphermatch.core.errors import OracleMismatchError
from ciphermatch.flash.ifp_sim import (
    PlaneState,
    VerticalLayout,
    bit_serial_add,
    count_ops,
    parse_program,
    run_program,
    trace_to_jsonl,
)
from ciphermatch.store.file_store import file_store
from ciphermatch.utils.logger import logger

TRACE_FILE = "trace.jsonl"
LATCH_FILE = "latches.json"


class SimulateCommands:
    def __init__(self, app: App):
        self.app = app

    def register(self) -> None:
        parser = self.app.add_command("simulate", self.simulate, help="Run a micro-program on one simulated plane.")
        parser.add_argument("program", type=Path, nargs="?", default=None, help="micro-program text file")
        parser.add_argument("--add", action="store_true", help="run the built-in bit-serial add on random operands")
        parser.add_argument("--bitlines", type=int, default=64)
        parser.add_argument("--wordlines", type=int, default=32)
        parser.add_argument("--width", type=int, default=32, help="operand width for --add")
        parser.add_argument("--out", type=Path, required=True, help="directory for trace.jsonl and latches.json")

    def simulate(self, args: argparse.Namespace) -> int:
        if args.program is None and not args.add:
            self.app.parser.error("simulate needs a PROGRAM file or --add")

        rng = self.app.rng(args)
        summary: dict[str, object] = {}

        if args.add:
            state, summary = self.run_add(args, rng)
            inputs = []
        else:
            program = parse_program(file_store.read_bytes(args.program).decode("utf-8"))
            state = PlaneState.blank(args.wordlines, args.bitlines)
            state.cells[:] = rng.integers(0, 2, size=state.cells.shape).astype(bool)
            for page in range(args.wordlines):
                state.load_page(page, rng.integers(0, 2, size=args.bitlines).astype(bool))

            run_program(state, program)
            summary["program_length"] = len(program)
            inputs = [args.program]

        trace = file_store.write_text(args.out / TRACE_FILE, trace_to_jsonl(state.op_trace))
        latches = file_store.write_json(args.out / LATCH_FILE, state.latch_dump())

        summary |= {"trace_length": len(state.op_trace), "counts": count_ops(state.op_trace)}
        self.app.record_run(args.out, params=None, seed=args.seed, inputs=inputs, outputs=[trace, latches], extra=summary)

        logger.info_dataset("Simulation", summary)
        print(json.dumps(summary))
        return 0

    @staticmethod
    def run_add(args: argparse.Namespace, rng: np.random.Generator) -> tuple[PlaneState, dict[str, object]]:
        layout = VerticalLayout(word_bits=args.width, bitlines=args.bitlines)
        state = PlaneState.blank(max(args.wordlines, args.width), args.bitlines)

        a = rng.integers(0, 1 << args.width, size=args.bitlines, dtype=np.uint64)
        b = rng.integers(0, 1 << args.width, size=args.bitlines, dtype=np.uint64)
        layout.store(state, a)

        got = bit_serial_add(state, layout, b)
        want = (a + b) & np.uint64((1 << args.width) - 1)

        wrong = int(np.count_nonzero(got != want))
        if wrong:
            raise OracleMismatchError(f"bit-serial add disagrees with the integer sum on {wrong} bitline(s)")

        return state, {"width": args.width, "bitlines": args.bitlines, "sums_checked": args.bitlines}
