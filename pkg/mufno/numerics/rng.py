"""Seeded, counter-based random streams with named substreams."""
from __future__ import annotations

import hashlib

import numpy as np

ALGORITHM = "philox4x64-boxmuller"


def _derive_key(seed: int, path: tuple[str, ...]) -> int:
    material = f"{seed & 0xFFFFFFFFFFFFFFFF}:{'/'.join(path)}".encode()
    return int.from_bytes(hashlib.blake2b(material, digest_size=16).digest(), "little")


class SeededRng:
    """A deterministic random stream.

    Each instance owns a Philox generator keyed by the seed and the substream
    path, so draws are identical on every platform and a substream never
    depends on how much was drawn from its parent.
    """

    algorithm = ALGORITHM

    def __init__(self, seed: int, _path: tuple[str, ...] = ()) -> None:
        self.seed = int(seed)
        self._path = _path
        self._gen = np.random.Generator(np.random.Philox(key=_derive_key(seed, _path)))

    @property
    def path(self) -> str:
        return "/".join(self._path)

    def substream(self, name: str | int) -> "SeededRng":
        """Return an independent stream identified by *name* under this one."""
        return SeededRng(self.seed, self._path + (str(name),))

    def uniform(self, size: int | tuple[int, ...] = ()) -> np.ndarray:
        """Uniform doubles in [0, 1)."""
        return self._gen.random(size)

    def normal(
        self, size: int | tuple[int, ...] = (), std: float = 1.0
    ) -> np.ndarray:
        """Gaussian draws N(0, std^2) via the Box-Muller transform.

        Pairs are interleaved, so a longer draw from a fresh stream extends a
        shorter one.
        """
        shape = (size,) if isinstance(size, int) else tuple(size)
        count = int(np.prod(shape)) if shape else 1
        pairs = (count + 1) // 2
        uniforms = self._gen.random(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log(1.0 - uniforms[:, 0]))
        angle = 2.0 * np.pi * uniforms[:, 1]
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        z = z[:count] * std
        if not shape:
            return z[0]
        return z.reshape(shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, low: int, high: int, size: int | tuple[int, ...] = ()):
        return self._gen.integers(low, high, size=size)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, path={self.path!r})"
