import struct

import numpy as np

from ciphermatch.core.errors import FormatError, ParameterError
from ciphermatch.models.he_params import HeParams

# magic, n, q_bits, t_bits
POLY_HEADER = struct.Struct("<4sIII")

# magic, n, q_bits, t_bits, noise_stddev, level
CIPHERTEXT_HEADER = struct.Struct("<4sIIIdI")

# magic, n, q_bits, t_bits, noise_stddev
KEY_HEADER = struct.Struct("<4sIIId")

# magic, n, q_bits, t_bits, noise_stddev, polynomial count, original bit length
PLAINTEXT_HEADER = struct.Struct("<4sIIIdIQ")

POLY_MAGIC = b"CMPL"
CIPHERTEXT_MAGIC = b"CMCT"
SECRET_KEY_MAGIC = b"CMSK"
PUBLIC_KEY_MAGIC = b"CMPK"
PLAINTEXT_MAGIC = b"CMPT"


def wire_dtype(bits: int) -> np.dtype:
    if bits <= 8:
        return np.dtype("<u1")
    if bits <= 16:
        return np.dtype("<u2")
    return np.dtype("<u4")


def read_struct(layout: struct.Struct, data: bytes | memoryview, offset: int, magic: bytes) -> tuple[tuple, int]:
    end = offset + layout.size
    if len(data) < end:
        raise FormatError(f"truncated {magic.decode()} header at byte {offset}")

    fields = layout.unpack_from(data, offset)
    if fields[0] != magic:
        raise FormatError(f"bad magic {bytes(fields[0])!r} at byte {offset}, expected {magic!r}")

    return fields, end


def read_array(data: bytes | memoryview, offset: int, count: int, dtype: np.dtype) -> tuple[np.ndarray, int]:
    end = offset + count * dtype.itemsize
    if len(data) < end:
        raise FormatError(f"truncated coefficient array at byte {offset}: need {count} x {dtype.itemsize} bytes")

    values = np.frombuffer(data, dtype=dtype, count=count, offset=offset).astype(np.uint64)
    return values, end


def params_from_fields(n: int, q_bits: int, t_bits: int, noise_stddev: float | None = None) -> HeParams:
    try:
        if noise_stddev is None:
            return HeParams(n=n, q_bits=q_bits, t_bits=t_bits)
        return HeParams(n=n, q_bits=q_bits, t_bits=t_bits, noise_stddev=noise_stddev)
    except ParameterError as e:
        raise FormatError(f"header carries invalid parameters: {e}") from e
