"""Codebook - Nested lattice codebooks and coset indexing.

A codebook holds one representative per coset of the fine lattice modulo
the coarse lattice, each reduced into the coarse Voronoi region. Codeword
indices are stable: the same point always maps to the same index.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from latticerelay.core.lattice import LatticeError, NestedPair, mod_lattice

logger = logging.getLogger(__name__)

# Enumeration bound on |codewords|
MAX_CODEBOOK_SIZE = 2**20


@dataclass(frozen=True, eq=False)
class LatticeCodebook:
    """Coset representatives of pair.fine modulo pair.coarse."""

    pair: NestedPair
    codewords: NDArray[np.float64] = field(repr=False)
    rate: float
    # Key -> index lookup for non-diagonal nestings
    _lookup: dict[tuple[int, ...], int] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.codewords)

    @property
    def dimension(self) -> int:
        return self.pair.fine.dimension

    @property
    def is_diagonal(self) -> bool:
        """Whether the nesting matrix is diagonal (indices are mixed-radix)."""
        matrix = self.pair.index_matrix
        return bool(np.all(matrix == np.diag(np.diagonal(matrix))))

    def codeword(self, index: int) -> NDArray[np.float64]:
        """Codeword at index."""
        return self.codewords[index]

    def coset_key(self, point: ArrayLike) -> tuple[int, ...]:
        """Canonical integer key of the coset containing a fine-lattice point.

        Raises:
            LatticeError: If point is not on the fine lattice.
        """
        return coset_key(self.pair, point)

    def index_of(self, point: ArrayLike) -> int:
        """Index of the codeword in the same coset as point.

        Args:
            point: A fine-lattice point (any representative of the coset).

        Returns:
            Codeword index.

        Raises:
            LatticeError: If point is not on the fine lattice.
        """
        coords = _fine_coordinates(self.pair, point)
        if self.is_diagonal:
            radix = np.abs(np.diagonal(self.pair.index_matrix))
            digits = np.mod(coords, radix)
            return int(np.ravel_multi_index(tuple(digits), tuple(radix)))
        return self._lookup[_key_from_coordinates(self.pair, coords)]


def _fine_coordinates(pair: NestedPair, point: ArrayLike) -> NDArray[np.int64]:
    """Integer coordinates of a fine-lattice point."""
    fine = pair.fine
    vector = np.asarray(point, dtype=np.float64).reshape(-1)
    if vector.shape != (fine.dimension,):
        raise LatticeError(
            f"dimension mismatch: expected {fine.dimension}, got {vector.size}"
        )
    raw = np.linalg.solve(fine.generator_matrix, vector)
    coords = np.rint(raw)
    if np.any(np.abs(raw - coords) > 1e-6):
        raise LatticeError("point is not on the fine lattice")
    return coords.astype(np.int64)


def _key_from_coordinates(
    pair: NestedPair, coords: NDArray[np.int64]
) -> tuple[int, ...]:
    """Key = (det·M⁻¹z) mod det, an integer vector that names the coset."""
    det = pair.index
    scaled = np.linalg.solve(pair.index_matrix.astype(np.float64), coords) * det
    return tuple(int(k) for k in np.mod(np.rint(scaled).astype(np.int64), det))


def coset_key(pair: NestedPair, point: ArrayLike) -> tuple[int, ...]:
    """Canonical key of the coset of pair.coarse containing a fine point."""
    return _key_from_coordinates(pair, _fine_coordinates(pair, point))


def _enumerate_coordinates(pair: NestedPair) -> NDArray[np.int64]:
    """Fine-lattice coordinates, one per coset, in lexicographic order."""
    matrix = pair.index_matrix
    n = matrix.shape[0]
    diagonal = np.abs(np.diagonal(matrix))
    if np.all(matrix == np.diag(np.diagonal(matrix))):
        grids = np.indices(tuple(diagonal)).reshape(n, -1).T
        return grids.astype(np.int64)

    # Integer points z = M t with t in [0,1)^n, found in the bounding box of M·[0,1]^n
    lo = np.minimum(matrix, 0).sum(axis=1)
    hi = np.maximum(matrix, 0).sum(axis=1)
    inverse = np.linalg.inv(matrix.astype(np.float64))
    found = []
    for z in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        t = inverse @ np.asarray(z, dtype=np.float64)
        if np.all(t >= -1e-9) and np.all(t < 1 - 1e-9):
            found.append(z)
    return np.asarray(found, dtype=np.int64).reshape(-1, n)


def build_codebook(
    pair: NestedPair, max_size: int = MAX_CODEBOOK_SIZE
) -> LatticeCodebook:
    """Enumerate the nested lattice codebook of a pair.

    Args:
        pair: Nested coarse/fine pair.
        max_size: Enumeration bound on the number of codewords.

    Returns:
        LatticeCodebook with rate (1/n)·log₂|codewords|.

    Raises:
        LatticeError: If the codebook would exceed max_size or the
            enumeration disagrees with the volume ratio.
    """
    size = pair.index
    if size > max_size:
        raise LatticeError(f"codebook of {size} codewords exceeds limit {max_size}")

    coords = _enumerate_coordinates(pair)
    points = coords @ pair.fine.generator_matrix.T
    codewords = mod_lattice(pair.coarse, points)

    is_diagonal = bool(
        np.all(pair.index_matrix == np.diag(np.diagonal(pair.index_matrix)))
    )
    lookup: dict[tuple[int, ...], int] | None = None
    if not is_diagonal:
        lookup = {}
        for i, z in enumerate(coords):
            key = _key_from_coordinates(pair, z)
            if key in lookup:
                raise LatticeError(f"duplicate coset at codeword {i}")
            lookup[key] = i

    volume_ratio = pair.coarse.volume() / pair.fine.volume()
    if len(codewords) != size or abs(volume_ratio - size) > 1e-6 * size:
        raise LatticeError(
            f"enumerated {len(codewords)} cosets, volume ratio is {volume_ratio:.6g}"
        )

    n = pair.fine.dimension
    rate = math.log2(size) / n
    codewords.setflags(write=False)
    logger.debug("Built codebook: %d codewords, rate %.4f bits/dim", size, rate)
    return LatticeCodebook(
        pair=pair,
        codewords=codewords,
        rate=rate,
        _lookup=lookup,
    )
