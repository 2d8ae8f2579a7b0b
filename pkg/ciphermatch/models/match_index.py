from dataclasses import dataclass


@dataclass(slots=True, frozen=True, order=True)
class MatchIndex:
    bit_offset: int
    shift: int
    span: int

    def as_dict(self) -> dict[str, int]:
        return {"bit_offset": self.bit_offset, "shift": self.shift, "span": self.span}
