"""Partition of the coordinates into consecutive blocks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BlockSpecError

__all__ = ["BlockSpec", "as_spec"]


@dataclass(frozen=True)
class BlockSpec:
    """Sizes ``(p_1, ..., p_k)`` of the ``k`` consecutive coordinate blocks.

    Block ``i`` occupies rows ``offsets[i]:offsets[i + 1]`` of a ``p x n``
    data matrix.
    """

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) < 1:
            raise BlockSpecError("a block spec needs at least one block")
        if any(s < 1 for s in sizes):
            raise BlockSpecError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def p(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)])

    def slices(self) -> list[slice]:
        off = self.offsets
        return [slice(int(off[i]), int(off[i + 1])) for i in range(self.k)]

    def subset(self, blocks: Iterable[int]) -> tuple["BlockSpec", np.ndarray]:
        """Restricted spec for the given block indices and the matching row indices."""
        blocks = list(blocks)
        sl = self.slices()
        rows = np.concatenate([np.arange(sl[b].start, sl[b].stop) for b in blocks])
        return BlockSpec(tuple(self.sizes[b] for b in blocks)), rows

    @classmethod
    def parse(cls, text: str) -> "BlockSpec":
        """Parse a comma list such as ``"10,10,15"``."""
        try:
            sizes = tuple(int(tok) for tok in text.split(",") if tok.strip())
        except ValueError:
            raise BlockSpecError(f"cannot parse block sizes from {text!r}") from None
        return cls(sizes)

    def __str__(self):
        return "(" + ",".join(str(s) for s in self.sizes) + ")"


def as_spec(spec: BlockSpec | Sequence[int]) -> BlockSpec:
    if isinstance(spec, BlockSpec):
        return spec
    return BlockSpec(tuple(spec))
