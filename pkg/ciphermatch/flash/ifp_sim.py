"""
Functional model of one NAND flash plane whose page buffer computes.

Each bitline owns one sensing latch (S) and three data latches (D0..D2).
Micro-operations act on every bitline at once; only bit values are
modelled, timing lives in the cost model.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from ciphermatch.core.errors import DimensionError, LayoutError, MicroProgramError
from ciphermatch.flash.transpose import horizontal_to_words, transpose_bits, words_to_horizontal
from ciphermatch.he.bfv import Ciphertext
from ciphermatch.he.ring_core import PolyQ
from ciphermatch.utils import op_trace
from ciphermatch.utils.logger import logger

D_LATCHES = 3
DEFAULT_BITLINES = 32768


class OpKind(str, Enum):
    READ_WL = "READ"
    LOAD_INPUT = "LOAD"
    COPY_S2D = "COPY_S2D"
    COPY_D2S = "COPY_D2S"
    AND_SD = "AND_SD"
    OR_SD = "OR_SD"
    XOR_D1D2 = "XOR_D1D2"
    OUTPUT_D = "OUT"
    RESET_D = "RESET_D"


# argument name carried by each mnemonic in program text
_ARGUMENT: dict[OpKind, str | None] = {
    OpKind.READ_WL: "wl",
    OpKind.LOAD_INPUT: "page",
    OpKind.COPY_S2D: "d",
    OpKind.COPY_D2S: "d",
    OpKind.AND_SD: "d",
    OpKind.OR_SD: "d",
    OpKind.XOR_D1D2: None,
    OpKind.OUTPUT_D: "d",
    OpKind.RESET_D: "d",
}

# a bare `AND_SD` ANDs the S-latch with D1, the latch XOR_D1D2 writes
_DEFAULT_ARGUMENT: dict[OpKind, int] = {OpKind.AND_SD: 1}

_CATEGORY: dict[OpKind, str] = {
    OpKind.READ_WL: "read",
    OpKind.LOAD_INPUT: "load",
    OpKind.COPY_S2D: "transfer",
    OpKind.COPY_D2S: "transfer",
    OpKind.AND_SD: "and_or",
    OpKind.OR_SD: "and_or",
    OpKind.XOR_D1D2: "xor",
    OpKind.OUTPUT_D: "output",
    OpKind.RESET_D: "reset",
}


@dataclass(slots=True, frozen=True)
class MicroOp:
    kind: OpKind
    arg: int | None = None

    def __str__(self) -> str:
        name = _ARGUMENT[self.kind]
        return self.kind.value if name is None else f"{self.kind.value} {name}={self.arg}"

    def as_dict(self) -> dict[str, str | int]:
        name = _ARGUMENT[self.kind]
        return {"op": self.kind.value} if name is None else {"op": self.kind.value, name: int(self.arg or 0)}


def ReadWL(wl: int) -> MicroOp:
    return MicroOp(OpKind.READ_WL, wl)


def LoadInput(page: int) -> MicroOp:
    return MicroOp(OpKind.LOAD_INPUT, page)


def CopyS2D(i: int) -> MicroOp:
    return MicroOp(OpKind.COPY_S2D, i)


def CopyD2S(i: int) -> MicroOp:
    return MicroOp(OpKind.COPY_D2S, i)


def AndSD(i: int = _DEFAULT_ARGUMENT[OpKind.AND_SD]) -> MicroOp:
    return MicroOp(OpKind.AND_SD, i)


def OrSD(i: int) -> MicroOp:
    return MicroOp(OpKind.OR_SD, i)


def XorD1D2() -> MicroOp:
    return MicroOp(OpKind.XOR_D1D2)


def OutputD(i: int) -> MicroOp:
    return MicroOp(OpKind.OUTPUT_D, i)


def ResetD(i: int) -> MicroOp:
    return MicroOp(OpKind.RESET_D, i)


@dataclass(slots=True)
class PlaneState:
    cells: np.ndarray
    s_latch: np.ndarray
    d_latch: np.ndarray
    inputs: dict[int, np.ndarray] = field(default_factory=dict)
    op_trace: list[MicroOp] = field(default_factory=list)
    outputs: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def blank(cls, wordlines: int, bitlines: int = DEFAULT_BITLINES) -> PlaneState:
        if wordlines < 1 or bitlines < 1:
            raise LayoutError(f"a plane needs at least one wordline and bitline, got {wordlines}x{bitlines}")

        return cls(
            cells=np.zeros((wordlines, bitlines), dtype=bool),
            s_latch=np.zeros(bitlines, dtype=bool),
            d_latch=np.zeros((D_LATCHES, bitlines), dtype=bool),
        )

    @property
    def wordlines(self) -> int:
        return self.cells.shape[0]

    @property
    def bitlines(self) -> int:
        return self.cells.shape[1]

    def load_page(self, page: int, bits: np.ndarray) -> None:
        vector = np.asarray(bits, dtype=bool)
        if vector.shape != (self.bitlines,):
            raise LayoutError(f"input page {page} has shape {vector.shape}, plane has {self.bitlines} bitlines")
        self.inputs[page] = vector

    def latch_dump(self) -> dict[str, str]:
        def text(v: np.ndarray) -> str:
            return "".join("1" if b else "0" for b in v)

        return {"S": text(self.s_latch), **{f"D{i}": text(self.d_latch[i]) for i in range(D_LATCHES)}}


def _latch(op: MicroOp) -> int:
    if op.arg is None or not 0 <= op.arg < D_LATCHES:
        raise LayoutError(f"{op.kind.value}: latch index must be in [0, {D_LATCHES}), got {op.arg}")
    return op.arg


def apply(state: PlaneState, op: MicroOp) -> PlaneState:
    match op.kind:
        case OpKind.READ_WL:
            if op.arg is None or not 0 <= op.arg < state.wordlines:
                raise LayoutError(f"READ: wordline {op.arg} outside [0, {state.wordlines})")
            state.s_latch = state.cells[op.arg].copy()

        case OpKind.LOAD_INPUT:
            if op.arg not in state.inputs:
                raise LayoutError(f"LOAD: no input page {op.arg} staged")
            state.s_latch = state.inputs[op.arg].copy()

        case OpKind.COPY_S2D:
            state.d_latch[_latch(op)] = state.s_latch

        case OpKind.COPY_D2S:
            state.s_latch = state.d_latch[_latch(op)].copy()

        case OpKind.AND_SD:
            state.s_latch = state.s_latch & state.d_latch[_latch(op)]

        case OpKind.OR_SD:
            i = _latch(op)
            state.d_latch[i] = state.d_latch[i] | state.s_latch

        case OpKind.XOR_D1D2:
            state.d_latch[1] = state.d_latch[1] ^ state.d_latch[2]

        case OpKind.OUTPUT_D:
            state.outputs.append(state.d_latch[_latch(op)].copy())

        case OpKind.RESET_D:
            state.d_latch[_latch(op)] = False

    state.op_trace.append(op)
    return state


def run_program(state: PlaneState, program: Iterable[MicroOp]) -> PlaneState:
    for op in program:
        apply(state, op)
    return state


def add_step_program(wordline: int, page: int) -> list[MicroOp]:
    """One sum bit from A (at `wordline`), B (input `page`) and the carry in D2."""
    return [
        LoadInput(page),
        CopyS2D(1),
        AndSD(2),       # S = B & C
        XorD1D2(),      # D1 = B ^ C
        CopyS2D(0),
        ReadWL(wordline),
        CopyS2D(2),
        AndSD(1),       # S = A & (B ^ C)
        XorD1D2(),      # D1 = sum
        CopyS2D(2),
        CopyD2S(0),
        OrSD(2),        # D2 = carry out
        OutputD(1),
    ]


def bit_add_step(state: PlaneState, wordline: int, b_page: int) -> tuple[np.ndarray, PlaneState]:
    run_program(state, add_step_program(wordline, b_page))
    return state.outputs[-1], state


def count_ops(trace: Sequence[MicroOp]) -> dict[str, int]:
    counts = Counter(_CATEGORY[op.kind] for op in trace)
    return {name: counts.get(name, 0) for name in ("read", "load", "transfer", "and_or", "xor", "output", "reset")}


def step_profile() -> dict[str, int]:
    return count_ops(add_step_program(0, 0))


@dataclass(slots=True, frozen=True)
class VerticalLayout:
    """Word j lives on bitline j; its bit k on wordline base_wordline + k."""

    word_bits: int = 32
    base_wordline: int = 0
    bitlines: int = DEFAULT_BITLINES

    def wordline(self, bit: int) -> int:
        if not 0 <= bit < self.word_bits:
            raise LayoutError(f"bit {bit} outside word width {self.word_bits}")
        return self.base_wordline + bit

    def bitline(self, word_index: int) -> int:
        if not 0 <= word_index < self.bitlines:
            raise LayoutError(f"word {word_index} outside {self.bitlines} bitlines")
        return word_index

    def check(self, state: PlaneState) -> None:
        if state.bitlines != self.bitlines:
            raise LayoutError(f"layout spans {self.bitlines} bitlines, plane has {state.bitlines}")

        if self.base_wordline < 0 or self.base_wordline + self.word_bits > state.wordlines:
            raise LayoutError(
                f"layout needs wordlines [{self.base_wordline}, {self.base_wordline + self.word_bits}), "
                f"plane has {state.wordlines}"
            )

    def _planes(self, words: np.ndarray) -> np.ndarray:
        values = np.asarray(words, dtype=np.uint64)
        if values.shape != (self.bitlines,):
            raise LayoutError(f"expected {self.bitlines} words, got shape {values.shape}")
        return transpose_bits(words_to_horizontal(values, self.word_bits))

    def store(self, state: PlaneState, words: np.ndarray) -> None:
        self.check(state)
        state.cells[self.base_wordline : self.base_wordline + self.word_bits] = self._planes(words)

    def load(self, state: PlaneState) -> np.ndarray:
        self.check(state)
        return horizontal_to_words(transpose_bits(state.cells[self.base_wordline : self.base_wordline + self.word_bits]))

    def stage_operand(self, state: PlaneState, words: np.ndarray) -> None:
        """Stage the other operand's bit-planes as input pages 0..word_bits-1, LSB first."""
        for bit, plane in enumerate(self._planes(words)):
            state.load_page(bit, plane)


def add_program(layout: VerticalLayout) -> list[MicroOp]:
    program = [ResetD(2)]
    for bit in range(layout.word_bits):
        program.extend(add_step_program(layout.wordline(bit), bit))
    return program


def bit_serial_add(state: PlaneState, layout: VerticalLayout, b_words: np.ndarray) -> np.ndarray:
    """(A + B) mod 2^word_bits on every bitline, A being the words already stored under `layout`."""
    layout.check(state)
    layout.stage_operand(state, b_words)

    first_output = len(state.outputs)
    run_program(state, add_program(layout))

    planes = np.stack(state.outputs[first_output:])
    return horizontal_to_words(transpose_bits(planes))


class InFlashAdder:
    """
    Ciphertext addition routed through simulated planes.

    Coefficients are written vertically (one coefficient per bitline) and
    the second operand is streamed in as bit-planes, one plane per input page.
    """

    def __init__(self, bitlines: int = DEFAULT_BITLINES) -> None:
        if bitlines < 1:
            raise LayoutError(f"bitlines must be positive, got {bitlines}")
        self.bitlines = bitlines

    def add_words(self, a: np.ndarray, b: np.ndarray, width: int) -> np.ndarray:
        if a.shape != b.shape:
            raise DimensionError(f"operand shapes differ: {a.shape} vs {b.shape}")

        out = np.empty(a.shape[0], dtype=np.uint64)
        for start in range(0, a.shape[0], self.bitlines):
            stop = min(start + self.bitlines, a.shape[0])
            lanes = stop - start
            layout = VerticalLayout(word_bits=width, bitlines=lanes)

            state = PlaneState.blank(width, lanes)
            layout.store(state, a[start:stop])
            out[start:stop] = bit_serial_add(state, layout, b[start:stop])

        return out

    def _add_poly(self, a: PolyQ, b: PolyQ) -> PolyQ:
        return PolyQ(self.add_words(a.coeffs, b.coeffs, a.params.q_bits), a.params)

    def hom_add(self, a: Ciphertext, b: Ciphertext) -> Ciphertext:
        if a.params.ring_key() != b.params.ring_key():
            raise DimensionError(f"hom_add ring mismatch: {a.params.ring_key()} vs {b.params.ring_key()}")

        op_trace.record("hom_add")
        op_trace.record("hom_add_in_flash")
        logger.debug(f"in-flash hom_add over {math.ceil(a.params.n / self.bitlines)} plane pass(es) per polynomial")

        return Ciphertext(self._add_poly(a.c0, b.c0), self._add_poly(a.c1, b.c1), max(a.level, b.level) + 1)


def hom_add_in_flash(db_ct: Ciphertext, query_ct: Ciphertext, bitlines: int = DEFAULT_BITLINES) -> Ciphertext:
    return InFlashAdder(bitlines).hom_add(db_ct, query_ct)


def parse_program(text: str) -> list[MicroOp]:
    """
    One micro-op per line, e.g. `READ wl=3`, `AND_SD d=2`, `XOR_D1D2`.
    `AND_SD` without an argument uses D1. Blank lines and `#` comments are
    skipped.
    """
    program: list[MicroOp] = []
    kinds = {k.value: k for k in OpKind}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        mnemonic, *params = line.split()
        kind = kinds.get(mnemonic.upper())
        if kind is None:
            raise MicroProgramError(f"unknown micro-op {mnemonic!r}", number)

        expected = _ARGUMENT[kind]
        if expected is None:
            if params:
                raise MicroProgramError(f"{kind.value} takes no arguments", number)
            program.append(MicroOp(kind))
            continue

        if not params and kind in _DEFAULT_ARGUMENT:
            program.append(MicroOp(kind, _DEFAULT_ARGUMENT[kind]))
            continue

        if len(params) != 1 or "=" not in params[0]:
            raise MicroProgramError(f"{kind.value} needs exactly one argument {expected}=N", number)

        name, _, value = params[0].partition("=")
        if name != expected:
            raise MicroProgramError(f"{kind.value} expects argument {expected!r}, got {name!r}", number)

        try:
            arg = int(value)
        except ValueError as e:
            raise MicroProgramError(f"argument {name} must be an integer, got {value!r}", number) from e

        if arg < 0 or (expected == "d" and arg >= D_LATCHES):
            raise MicroProgramError(f"argument {name}={arg} out of range", number)

        program.append(MicroOp(kind, arg))

    return program


def format_program(program: Iterable[MicroOp]) -> str:
    return "".join(f"{op}\n" for op in program)


def trace_to_jsonl(trace: Sequence[MicroOp]) -> str:
    return "".join(json.dumps({"step": i, **op.as_dict()}) + "\n" for i, op in enumerate(trace))
