"""Binary tensor container: a fixed little-endian header plus raw payload.

Layout (all little-endian)::

    magic "PIMC" (4 bytes)
    version          u16
    dtype code       u8    (0 = float32, 1 = uint16 + scale)
    reserved         u8
    scale            f32   (uint16 payloads are divided by this on read)
    t, c, h, w       u32 x 4
    band block       c strings, each u16 length prefix + UTF-8 bytes
    timestamp block  t x u32, days since 1970-01-01
    payload          row-major t*c*h*w values (f32 or u16 per dtype code)

The container is a generic 4-d array carrier: cubes use the axes as
(time, band, row, col); other arrays (series sets, plot batches,
checkpoint tensors) map their own axes onto the same four slots and are
documented where they do so.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .errors import CorruptionError, FormatError

MAGIC = b"PIMC"
VERSION = 1
DTYPE_F32 = 0
DTYPE_U16 = 1

_HEADER = struct.Struct("<4sHBBf4I")


def write_block(
    fh: BinaryIO,
    data: np.ndarray,
    band_names: list[str],
    timestamps: list[int],
    dtype_code: int = DTYPE_F32,
    scale: float = 1.0,
) -> None:
    """Append one container block to an open binary stream."""
    data = np.asarray(data)
    if data.ndim != 4:
        raise FormatError(f"container payload must be 4-d, got shape {data.shape}")
    t, c, h, w = data.shape
    if min(t, c, h, w) == 0:
        raise FormatError(f"container dimensions must all be positive, got {data.shape}")
    if len(band_names) != c:
        raise FormatError(f"{c} channels but {len(band_names)} band names")
    if len(timestamps) != t:
        raise FormatError(f"{t} steps but {len(timestamps)} timestamps")
    if dtype_code not in (DTYPE_F32, DTYPE_U16):
        raise FormatError(f"unknown dtype code {dtype_code}")
    fh.write(_HEADER.pack(MAGIC, VERSION, dtype_code, 0, float(scale), t, c, h, w))
    for name in band_names:
        raw = name.encode("utf-8")
        fh.write(struct.pack("<H", len(raw)))
        fh.write(raw)
    fh.write(np.asarray(timestamps, dtype="<u4").tobytes())
    if dtype_code == DTYPE_F32:
        fh.write(np.ascontiguousarray(data, dtype="<f4").tobytes())
    else:
        fh.write(np.ascontiguousarray(data, dtype="<u2").tobytes())


def read_block(fh: BinaryIO) -> tuple[np.ndarray, list[str], list[int], float, int]:
    """Read one container block; returns (data, bands, timestamps, scale, dtype).

    uint16 payloads are converted to float32 via value/scale clamped to
    [0, 1]; float32 payloads are returned verbatim.
    """
    head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise CorruptionError("file too short for a container header")
    magic, version, dtype_code, _reserved, scale, t, c, h, w = _HEADER.unpack(head)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported container version {version}")
    if dtype_code not in (DTYPE_F32, DTYPE_U16):
        raise FormatError(f"unknown dtype code {dtype_code}")
    if min(t, c, h, w) == 0:
        raise FormatError(f"degenerate dimensions (t={t}, c={c}, h={h}, w={w})")
    bands = []
    for _ in range(c):
        lp = fh.read(2)
        if len(lp) < 2:
            raise CorruptionError("truncated band-name block")
        (n,) = struct.unpack("<H", lp)
        raw = fh.read(n)
        if len(raw) < n:
            raise CorruptionError("truncated band-name block")
        bands.append(raw.decode("utf-8"))
    ts_raw = fh.read(4 * t)
    if len(ts_raw) < 4 * t:
        raise CorruptionError("truncated timestamp block")
    timestamps = np.frombuffer(ts_raw, dtype="<u4").astype(np.int64).tolist()
    count = t * c * h * w
    itemsize = 4 if dtype_code == DTYPE_F32 else 2
    payload = fh.read(count * itemsize)
    if len(payload) < count * itemsize:
        raise CorruptionError(
            f"payload truncated: expected {count * itemsize} bytes, got {len(payload)}"
        )
    if dtype_code == DTYPE_F32:
        data = np.frombuffer(payload, dtype="<f4").reshape(t, c, h, w).copy()
    else:
        raw16 = np.frombuffer(payload, dtype="<u2").reshape(t, c, h, w)
        data = np.clip(raw16.astype(np.float32) / np.float32(scale), 0.0, 1.0)
        # 0xFFFF is the uint16 missing-value sentinel; surface it as NaN
        data[raw16 == 0xFFFF] = np.nan
    return data, bands, timestamps, scale, dtype_code


def write_tensor(path, data, band_names, timestamps, dtype_code=DTYPE_F32, scale=1.0) -> None:
    with open(path, "wb") as fh:
        write_block(fh, data, band_names, timestamps, dtype_code, scale)


def read_tensor(path) -> tuple[np.ndarray, list[str], list[int]]:
    """Read a standalone single-block container file (strict: no trailing bytes)."""
    with open(path, "rb") as fh:
        data, bands, timestamps, _scale, _dt = read_block(fh)
        if fh.read(1):
            raise CorruptionError(f"{path}: trailing bytes after payload")
    return data, bands, timestamps
