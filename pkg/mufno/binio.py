"""Little-endian binary helpers shared by the dataset and checkpoint formats."""
from __future__ import annotations

import struct
from typing import Type

import numpy as np

from mufno.errors import DatasetFormatError

# CRC-64/XZ (ECMA-182 polynomial, reflected, init and xorout all ones)
_CRC64_POLY = 0xC96C5795D7870F42
_CRC64_MASK = 0xFFFFFFFFFFFFFFFF
_CRC_CHUNK_SIZE = 1 << 20


def _crc64_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = (crc >> 1) ^ _CRC64_POLY if crc & 1 else crc >> 1
        table.append(crc)
    return tuple(table)


_CRC64_TABLE = _crc64_table()


def _crc64_update(state: int, chunk: memoryview) -> int:
    table = _CRC64_TABLE
    for byte in chunk:
        state = table[(state ^ byte) & 0xFF] ^ (state >> 8)
    return state


def crc64(data: bytes | bytearray | memoryview, crc: int = 0) -> int:
    """CRC-64/XZ of *data*; pass a previous result as *crc* to continue it.

    Any buffer works (bytes, bytearray, memoryview, contiguous arrays). It is
    walked in 1 MiB slices of a memoryview, so large payloads are not copied.
    """
    view = memoryview(data).cast("B")
    state = crc ^ _CRC64_MASK
    for start in range(0, len(view), _CRC_CHUNK_SIZE):
        state = _crc64_update(state, view[start : start + _CRC_CHUNK_SIZE])
    return state ^ _CRC64_MASK


class Writer:
    """Accumulates a little-endian byte stream."""

    def __init__(self) -> None:
        self._parts: list[bytes] = []

    def raw(self, data: bytes) -> None:
        self._parts.append(data)

    def u32(self, value: int) -> None:
        self._parts.append(struct.pack("<I", value))

    def u64(self, value: int) -> None:
        self._parts.append(struct.pack("<Q", value))

    def f64(self, value: float) -> None:
        self._parts.append(struct.pack("<d", value))

    def array(self, values: np.ndarray) -> None:
        """Raw float64 payload; complex arrays are written as re/im pairs."""
        arr = np.ascontiguousarray(values)
        if np.iscomplexobj(arr):
            arr = arr.astype("<c16").view("<f8")
        else:
            arr = arr.astype("<f8")
        self._parts.append(arr.tobytes())

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    """Bounds-checked cursor over a byte buffer.

    Every short read raises *error* with the offset where it happened.
    """

    def __init__(self, data: bytes, error: Type[DatasetFormatError]) -> None:
        self._data = data
        self._error = error
        self.offset = 0

    def remaining(self) -> int:
        return len(self._data) - self.offset

    def raw(self, count: int) -> bytes:
        if count < 0 or self.offset + count > len(self._data):
            raise self._error(
                f"truncated: needed {count} bytes, {self.remaining()} left",
                offset=self.offset,
            )
        chunk = self._data[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.raw(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.raw(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.raw(8))[0]

    def array(self, shape: tuple[int, ...], complex_: bool = False) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64)) * (2 if complex_ else 1)
        data = np.frombuffer(self.raw(8 * count), dtype="<f8").astype(np.float64)
        if complex_:
            return data.view(np.complex128).reshape(shape).copy()
        return data.reshape(shape)

    def fail(self, message: str) -> DatasetFormatError:
        return self._error(message, offset=self.offset)
