"""FNOD dataset files.

Layout (little-endian): magic ``FNOD``, version u32 = 1, d u32, N u64,
n u64, channels u32, inputs as float64 row-major [N, n, channels], targets
in the same shape, then the CRC-64/XZ of every preceding byte.
"""
from __future__ import annotations

import logging
from pathlib import Path

from mufno.binio import Reader, Writer, crc64
from mufno.data.dataset import Dataset
from mufno.errors import DataMissingError, DatasetFormatError, UnsupportedVersionError
from mufno.numerics.fft import is_power_of_two
from mufno.numerics.grid import Grid1D

_log = logging.getLogger(__name__)

MAGIC = b"FNOD"
VERSION = 1
HEADER_SIZE = 32


def encode_dataset(ds: Dataset) -> bytes:
    out = Writer()
    out.raw(MAGIC)
    out.u32(VERSION)
    out.u32(1)
    out.u64(len(ds))
    out.u64(ds.grid.n)
    out.u32(ds.channels)
    out.array(ds.inputs)
    out.array(ds.targets)
    body = out.getvalue()
    tail = Writer()
    tail.u64(crc64(body))
    return body + tail.getvalue()


def decode_dataset(data: bytes) -> Dataset:
    """Parse an FNOD buffer into a Dataset.

    Raises:
        DatasetFormatError: Bad magic, truncation, bad shape or CRC mismatch;
            the message carries the byte offset.
        UnsupportedVersionError: Unknown version number.
    """
    src = Reader(data, DatasetFormatError)
    if src.raw(4) != MAGIC:
        raise DatasetFormatError("bad magic, not an FNOD file", offset=0)
    version = src.u32()
    if version != VERSION:
        raise UnsupportedVersionError(
            f"unsupported dataset version {version}", offset=4
        )
    d = src.u32()
    if d != 1:
        raise DatasetFormatError(
            f"only d=1 datasets are supported, got d={d}", offset=8
        )
    count = src.u64()
    n = src.u64()
    channels = src.u32()
    if n < 4 or not is_power_of_two(n):
        raise DatasetFormatError(f"grid size {n} is not a power of two >= 4", offset=20)
    if channels < 1:
        raise DatasetFormatError("channel count must be >= 1", offset=28)
    expected = HEADER_SIZE + 2 * 8 * count * n * channels + 8
    if len(data) != expected:
        raise DatasetFormatError(
            f"file is {len(data)} bytes, header implies {expected}",
            offset=min(len(data), expected),
        )
    shape = (int(count), int(n), int(channels))
    inputs = src.array(shape)
    targets = src.array(shape)
    body_end = src.offset
    stored = src.u64()
    actual = crc64(memoryview(data)[:body_end])
    if stored != actual:
        raise DatasetFormatError(
            f"CRC64 mismatch: stored {stored:016x}, computed {actual:016x}",
            offset=body_end,
        )
    return Dataset(inputs.copy(), targets.copy(), Grid1D(int(n)))


def save_dataset(ds: Dataset, path: str | Path) -> int:
    """Write *ds* to *path* and return the file's CRC64."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = encode_dataset(ds)
    path.write_bytes(data)
    crc = int.from_bytes(data[-8:], "little")
    _log.info("Wrote %s (%d samples, n=%d, crc64=%016x)", path, len(ds), ds.grid.n, crc)
    return crc


def load_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    if not path.is_file():
        raise DataMissingError(f"dataset file not found: {path}")
    return decode_dataset(path.read_bytes())


def file_crc64(path: str | Path) -> int:
    """CRC64 stored in the trailer of an FNOD file."""
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE + 8:
        raise DatasetFormatError("file too short for an FNOD trailer", offset=len(data))
    return int.from_bytes(data[-8:], "little")
