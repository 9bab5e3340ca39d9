"""Binary tensor files.

Native format (magic ``CTP1``): 4-byte magic, u8 version (=1), u8 dtype
(0 = float32, 1 = float64), u8 ndim (1..4), one zero byte, then ndim
little-endian u64 dims, then the row-major little-endian payload.

Read-only support for the community ``.npy`` container, restricted to
version 1, little-endian float32/float64, C order.
"""

from __future__ import annotations

import ast
import struct
from pathlib import Path

import numpy as np

MAGIC = b"CTP1"
NPY_MAGIC = b"\x93NUMPY"
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_CODES = {np.dtype("float32"): 0, np.dtype("float64"): 1}


class TensorFormatError(ValueError):
    """Unreadable or malformed tensor file."""


def write_tensor(path, array: np.ndarray) -> None:
    """Write ``array`` (float32 or float64, 1-4 dims) in the native format."""
    arr = np.ascontiguousarray(array)
    if arr.dtype not in _DTYPE_CODES:
        raise TensorFormatError(
            f"only float32/float64 tensors are supported, got {arr.dtype}"
        )
    if not 1 <= arr.ndim <= 4:
        raise TensorFormatError(f"ndim must be 1..4, got {arr.ndim}")
    header = MAGIC + struct.pack(
        "<BBBB", 1, _DTYPE_CODES[arr.dtype], arr.ndim, 0
    ) + struct.pack(f"<{arr.ndim}Q", *arr.shape)
    payload = arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes(order="C")
    Path(path).write_bytes(header + payload)


def read_tensor(path) -> np.ndarray:
    """Read a native or ``.npy`` tensor file.

    Raises :class:`TensorFormatError` with a distinct message for bad magic,
    unsupported version/dtype/order, and truncated or oversized payloads.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise TensorFormatError(f"cannot read tensor file {path}: {exc}") from exc
    if raw[:4] == MAGIC:
        return _read_native(raw, path)
    if raw[: len(NPY_MAGIC)] == NPY_MAGIC:
        return _read_npy(raw, path)
    raise TensorFormatError(
        f"{path}: bad magic {raw[:4]!r}, expected {MAGIC!r} or a .npy header"
    )


def _read_native(raw: bytes, path) -> np.ndarray:
    if len(raw) < 8:
        raise TensorFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    version, dtype_code, ndim, reserved = struct.unpack("<BBBB", raw[4:8])
    if version != 1:
        raise TensorFormatError(f"{path}: unsupported version {version}")
    if dtype_code not in _DTYPES:
        raise TensorFormatError(f"{path}: unsupported dtype code {dtype_code}")
    if not 1 <= ndim <= 4:
        raise TensorFormatError(f"{path}: ndim must be 1..4, got {ndim}")
    if reserved != 0:
        raise TensorFormatError(f"{path}: reserved byte must be zero, got {reserved}")
    dims_end = 8 + 8 * ndim
    if len(raw) < dims_end:
        raise TensorFormatError(f"{path}: truncated dims block")
    dims = struct.unpack(f"<{ndim}Q", raw[8:dims_end])
    dtype = _DTYPES[dtype_code]
    expected = int(np.prod(dims, dtype=np.uint64)) * dtype.itemsize
    actual = len(raw) - dims_end
    if actual < expected:
        raise TensorFormatError(
            f"{path}: truncated payload, expected {expected} bytes, got {actual}"
        )
    if actual > expected:
        raise TensorFormatError(
            f"{path}: trailing bytes, expected {expected} bytes, got {actual}"
        )
    return np.frombuffer(raw[dims_end:], dtype=dtype).reshape(dims).copy()


def _read_npy(raw: bytes, path) -> np.ndarray:
    if len(raw) < 10:
        raise TensorFormatError(f"{path}: truncated .npy header")
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise TensorFormatError(
            f"{path}: unsupported .npy version {major}.{minor}, only 1.0 is accepted"
        )
    (header_len,) = struct.unpack("<H", raw[8:10])
    header_end = 10 + header_len
    if len(raw) < header_end:
        raise TensorFormatError(f"{path}: truncated .npy header block")
    try:
        header = ast.literal_eval(raw[10:header_end].decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise TensorFormatError(f"{path}: unparseable .npy header") from exc
    descr = header.get("descr")
    if descr not in ("<f4", "<f8"):
        raise TensorFormatError(
            f"{path}: unsupported .npy descr {descr!r}, only little-endian "
            "float32/float64 is accepted"
        )
    if header.get("fortran_order"):
        raise TensorFormatError(f"{path}: Fortran-order .npy is not supported")
    shape = header.get("shape")
    if not isinstance(shape, tuple) or not 1 <= len(shape) <= 4:
        raise TensorFormatError(f"{path}: .npy shape must have 1..4 dims, got {shape!r}")
    dtype = np.dtype(descr)
    expected = int(np.prod(shape, dtype=np.uint64)) * dtype.itemsize
    actual = len(raw) - header_end
    if actual != expected:
        raise TensorFormatError(
            f"{path}: .npy payload mismatch, expected {expected} bytes, got {actual}"
        )
    return np.frombuffer(raw[header_end:], dtype=dtype).reshape(shape).copy()
