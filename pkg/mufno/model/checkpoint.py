"""MUFN parameter checkpoints.

Layout (little-endian): magic ``MUFN``, version u32, config length u32 and
the FnoConfig as UTF-8 JSON, layer count u32 and one f64 a(K) per layer, then
every tensor in declaration order as rank u64, dims u64 each, and float64
data (complex tensors as interleaved re/im).
"""
from __future__ import annotations

import dataclasses
import json
import logging
from pathlib import Path

import numpy as np
from pydantic import TypeAdapter, ValidationError

from mufno.binio import Reader, Writer
from mufno.errors import CheckpointFormatError, SizeError, UnsupportedVersionError
from mufno.model.params import FnoConfig, ModelParams, is_spectral, tensor_names

_log = logging.getLogger(__name__)

MAGIC = b"MUFN"
VERSION = 1


def encode_checkpoint(config: FnoConfig, params: ModelParams) -> bytes:
    out = Writer()
    out.raw(MAGIC)
    out.u32(VERSION)
    blob = json.dumps(dataclasses.asdict(config), sort_keys=True).encode("utf-8")
    out.u32(len(blob))
    out.raw(blob)
    out.u32(params.L)
    for spec in params.spectral:
        out.f64(spec.a_scale)
    for _, tensor, _ in params.flat_items():
        out.u64(tensor.ndim)
        for dim in tensor.shape:
            out.u64(dim)
        out.array(tensor)
    return out.getvalue()


def decode_checkpoint(data: bytes) -> tuple[FnoConfig, ModelParams]:
    """Parse a MUFN buffer.

    Raises:
        CheckpointFormatError: Bad magic, truncation, or inconsistent shapes.
        UnsupportedVersionError: Unknown version number.
    """
    src = Reader(data, CheckpointFormatError)
    if src.raw(4) != MAGIC:
        raise CheckpointFormatError("bad magic, not a MUFN checkpoint", offset=0)
    version = src.u32()
    if version != VERSION:
        raise UnsupportedVersionError(
            f"unsupported checkpoint version {version}", offset=4
        )
    length = src.u32()
    start = src.offset
    try:
        raw_config = json.loads(src.raw(length).decode("utf-8"))
        config = TypeAdapter(FnoConfig).validate_python(raw_config)
    except (UnicodeDecodeError, json.JSONDecodeError, ValidationError) as exc:
        raise CheckpointFormatError(
            f"unreadable config block: {exc}", offset=start
        ) from exc

    L = src.u32()
    if L != config.L:
        raise src.fail(f"layer count {L} disagrees with config L={config.L}")
    a_scales = [src.f64() for _ in range(L)]

    tensors: dict[str, np.ndarray] = {}
    for name in tensor_names(L):
        rank = src.u64()
        if rank > 8:
            raise src.fail(f"implausible rank {rank} for {name}")
        shape = tuple(src.u64() for _ in range(rank))
        tensors[name] = src.array(shape, complex_=is_spectral(name))
    if src.remaining():
        raise src.fail(f"{src.remaining()} trailing bytes after last tensor")

    try:
        params = ModelParams.from_dict(
            tensors, a_scales, real_r_mode=config.real_r_mode
        )
    except (SizeError, ValueError) as exc:
        raise CheckpointFormatError(
            f"inconsistent tensors: {exc}", offset=src.offset
        ) from exc
    _check_shapes(config, params)
    return config, params


def _check_shapes(config: FnoConfig, params: ModelParams) -> None:
    m = config.m
    expected = {
        "P.weight": (config.lifted_channels, m),
        "Q.1.weight": (m, config.out_channels),
    }
    for layer in range(config.L):
        expected[f"layers.{layer}.R"] = (config.K, m, m)
    for name, tensor, _ in params.flat_items():
        want = expected.get(name)
        if want is not None and tensor.shape != want:
            raise CheckpointFormatError(
                f"{name} has shape {tensor.shape}, config implies {want}"
            )


def save_checkpoint(path: str | Path, config: FnoConfig, params: ModelParams) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(config, params))
    _log.info("Wrote checkpoint %s", path)


def load_checkpoint(path: str | Path) -> tuple[FnoConfig, ModelParams]:
    return decode_checkpoint(Path(path).read_bytes())
