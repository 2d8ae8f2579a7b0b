class CipherMatchError(Exception):
    exit_code: int = 1


class MissingInputError(CipherMatchError):
    exit_code = 3


class FormatError(CipherMatchError):
    exit_code = 4


class PackingError(CipherMatchError):
    exit_code = 4


class ParameterError(CipherMatchError):
    exit_code = 5


class DimensionError(ParameterError):
    """Operands live in rings with different parameters."""


class LayoutError(CipherMatchError):
    exit_code = 5


class OracleMismatchError(CipherMatchError):
    exit_code = 6


class MicroProgramError(CipherMatchError):
    exit_code = 7

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")
