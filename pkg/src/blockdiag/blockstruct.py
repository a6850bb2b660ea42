"""Block partitions of an index set and the block projection map."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParseError

#: default relative tolerance of :func:`is_block_diagonal`
BLOCK_TOL = 1e-12


@dataclass(frozen=True)
class BlockPartition:
    """A partition of ``{0, ..., n-1}`` into nonempty, disjoint blocks.

    Blocks need not be contiguous. The partition keeps an index -> block
    lookup table and the boolean ``same_block`` mask so that projecting a
    matrix is a single vectorized ``where``.
    """

    n: int
    blocks: tuple[tuple[int, ...], ...]
    labels: np.ndarray = field(init=False, repr=False, compare=False)
    same_block: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError(f"partition dimension must be positive, got {self.n}")
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        labels = np.full(self.n, -1, dtype=int)
        for b, members in enumerate(blocks):
            if not members:
                raise DimensionError(f"block {b} is empty")
            for i in members:
                if not 0 <= i < self.n:
                    raise DimensionError(f"index {i} outside 0..{self.n - 1}")
                if labels[i] != -1:
                    raise DimensionError(f"index {i} appears in more than one block")
                labels[i] = b
        missing = np.flatnonzero(labels == -1)
        if missing.size:
            raise DimensionError(f"indices {missing.tolist()} belong to no block")
        labels.setflags(write=False)
        mask = labels[:, None] == labels[None, :]
        mask.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "same_block", mask)

    @classmethod
    def from_sizes(cls, sizes) -> BlockPartition:
        """Contiguous blocks of the given sizes, e.g. ``(3, 3, 2)``."""
        blocks, start = [], 0
        for size in sizes:
            blocks.append(tuple(range(start, start + size)))
            start += size
        return cls(start, tuple(blocks))

    @classmethod
    def single(cls, n: int) -> BlockPartition:
        return cls(n, (tuple(range(n)),))

    @classmethod
    def singletons(cls, n: int) -> BlockPartition:
        return cls(n, tuple((i,) for i in range(n)))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> BlockPartition:
        """Parse ``"0,1,2;3,4;5,6,7"``.

        If ``n`` is omitted it is inferred as one more than the largest index.
        """
        blocks = []
        column = 1
        for chunk in text.split(";"):
            block = []
            offset = column
            for item in chunk.split(","):
                token = item.strip()
                if not token:
                    raise ParseError(f"empty index in partition {text!r}", 1, offset)
                try:
                    block.append(int(token))
                except ValueError:
                    raise ParseError(f"bad index {token!r} in partition", 1, offset) from None
                offset += len(item) + 1
            blocks.append(tuple(block))
            column += len(chunk) + 1
        if n is None:
            n = max(max(b) for b in blocks) + 1
        return cls(n, tuple(blocks))

    def __str__(self) -> str:
        return ";".join(",".join(str(i) for i in b) for b in self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def check(self, a: np.ndarray) -> None:
        if a.shape[-2:] != (self.n, self.n):
            raise DimensionError(
                f"matrix of shape {a.shape} does not match partition of size {self.n}"
            )


def block_project(a, partition: BlockPartition) -> np.ndarray:
    """Keep the entries ``a[i, j]`` with ``i``, ``j`` in the same block, zero the rest.

    Works on stacks of matrices too (leading axes are broadcast).
    """
    a = np.asarray(a)
    partition.check(a)
    return np.where(partition.same_block, a, 0)


def off_block_norm(a, partition: BlockPartition) -> float:
    """Frobenius norm of the block off-diagonal part of ``a``."""
    a = np.asarray(a)
    partition.check(a)
    return float(np.linalg.norm(np.where(partition.same_block, 0, a)))


def is_hermitian(a, tol: float = 1e-12) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(np.linalg.norm(a), 1.0)
    return bool(np.linalg.norm(a - a.conj().T) <= tol * scale)


def is_unitary(a, tol: float = 1e-12) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    eye = np.eye(a.shape[0])
    return bool(np.linalg.norm(a.conj().T @ a - eye) <= tol * np.sqrt(a.shape[0]))


def is_block_diagonal(a, partition: BlockPartition, tol: float = BLOCK_TOL) -> bool:
    """True when the off-block part is below ``tol`` relative to ``||a||_F``."""
    a = np.asarray(a)
    return off_block_norm(a, partition) <= tol * np.linalg.norm(a)
