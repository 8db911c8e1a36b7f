"""Bit-exact reader/writer for the ".npy" v1.0 array container.

Supported payloads: little-endian 4-byte float ('<f4') and 1-byte unsigned
('|u1'), C order, 2-D or 3-D.  The writer mirrors the reference layout:
magic 0x93 "NUMPY", version bytes 1.0, a little-endian uint16 header
length, then the ASCII header dict space-padded so the payload starts at a
multiple of 64 bytes.  The reader accepts any literal-dict header
formatting (including compact, unpadded ones) as long as the three fields
are present.
"""

from __future__ import annotations

import ast
from pathlib import Path

import numpy as np

from .errors import (
    BadHeader,
    BadMagic,
    BadVersion,
    FortranOrder,
    InvalidInput,
    MissingFile,
    Truncated,
    TrailingData,
    UnsupportedDtype,
)

MAGIC = b"\x93NUMPY"
_SUPPORTED_DESCRS = ("<f4", "|u1")
_HEADER_ALIGN = 64


def _parse_header(text: str) -> tuple[str, tuple[int, ...]]:
    try:
        header = ast.literal_eval(text)
    except (ValueError, SyntaxError) as exc:
        raise BadHeader(f"header is not a literal dict: {exc}") from None
    if not isinstance(header, dict):
        raise BadHeader(f"header must be a dict, got {type(header).__name__}")
    for field in ("descr", "fortran_order", "shape"):
        if field not in header:
            raise BadHeader(f"header field '{field}' missing")

    descr = header["descr"]
    if descr not in _SUPPORTED_DESCRS:
        raise UnsupportedDtype(f"descr {descr!r} unsupported (expected one of {_SUPPORTED_DESCRS})")
    if header["fortran_order"] is not False:
        raise FortranOrder(f"fortran_order must be False, got {header['fortran_order']!r}")

    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or len(shape) not in (2, 3)
        or not all(isinstance(d, int) and d >= 1 for d in shape)
    ):
        raise BadHeader(f"shape must be a 2-D or 3-D tuple of positive ints, got {shape!r}")
    return descr, shape


def read_array(path) -> np.ndarray:
    """Parse a .npy v1.0 file into a 2-D grid or a 3-D C x H x W stack."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    data = path.read_bytes()

    if len(data) < 8:
        raise Truncated(f"file is {len(data)} bytes, shorter than the 8-byte preamble")
    if data[:6] != MAGIC:
        raise BadMagic(f"magic {data[:6]!r}, expected {MAGIC!r}")
    version = (data[6], data[7])
    if version != (1, 0):
        raise BadVersion(f"version {version[0]}.{version[1]}, only 1.0 supported")
    if len(data) < 10:
        raise Truncated("file ends inside the header-length field")
    header_len = int.from_bytes(data[8:10], "little")
    if len(data) < 10 + header_len:
        raise Truncated(f"header claims {header_len} bytes but only {len(data) - 10} remain")

    descr, shape = _parse_header(data[10 : 10 + header_len].decode("latin1"))
    dtype = np.dtype(descr)
    expected = int(np.prod(shape)) * dtype.itemsize
    payload = data[10 + header_len :]
    if len(payload) < expected:
        raise Truncated(f"payload is {len(payload)} bytes, expected {expected} for shape {shape}")
    if len(payload) > expected:
        raise TrailingData(f"{len(payload) - expected} trailing bytes after payload")
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def _build_header(descr: str, shape: tuple[int, ...]) -> bytes:
    body = ("{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (descr, repr(shape))).encode(
        "latin1"
    )
    pad = (-(len(MAGIC) + 4 + len(body) + 1)) % _HEADER_ALIGN
    header = body + b" " * pad + b"\n"
    return MAGIC + bytes((1, 0)) + len(header).to_bytes(2, "little") + header


def write_array(path, array) -> None:
    """Serialize a 2-D grid or 3-D stack; floats are stored as '<f4', uint8 as '|u1'."""
    arr = np.asarray(array)
    if arr.ndim not in (2, 3):
        raise InvalidInput(f"only 2-D or 3-D arrays supported, got {arr.ndim}-D")
    if arr.size == 0:
        raise InvalidInput(f"array has an empty dimension: shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.floating):
        out = np.ascontiguousarray(arr, dtype="<f4")
        descr = "<f4"
    elif arr.dtype == np.uint8 or arr.dtype == np.bool_:
        out = np.ascontiguousarray(arr, dtype="|u1")
        descr = "|u1"
    else:
        raise InvalidInput(f"unsupported dtype {arr.dtype}, expected float or uint8")

    blob = _build_header(descr, tuple(int(d) for d in out.shape)) + out.tobytes(order="C")
    Path(path).write_bytes(blob)
