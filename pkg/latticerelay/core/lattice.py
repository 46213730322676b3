"""Lattice - Quantizers, modulo reduction and Voronoi sampling.

Small-dimension lattices in two forms: uniform-scale (Δ·Zⁿ) and explicit
generator matrices whose columns are the basis vectors. All operations are
pure functions of their inputs; sampling takes an explicit seed or generator.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

# Largest supported dimension
MAX_DIMENSION = 16

# Relative tolerance for point equality
DEFAULT_TOLERANCE = 1e-9

# Monte-Carlo second moment defaults
DEFAULT_MC_TRIALS = 1_000_000
MIN_MC_TRIALS = 1000

# Candidate offsets scored per block during the {-1,0,1}^n search
_OFFSET_BLOCK = 6561
_SEARCH_BUDGET = 2_000_000  # candidate points scored per chunk

SecondMomentMode = Literal["exact", "monte_carlo"]


class LatticeError(Exception):
    """Raised when a lattice operation receives invalid input."""

    pass


@dataclass(frozen=True, eq=False)
class Lattice:
    """An n-dimensional real lattice.

    Exactly one of ``scale`` (uniform-scale Δ·Zⁿ) or ``generator``
    (full-rank n×n matrix, basis vectors as columns) is set.
    """

    dimension: int
    scale: float | None = None
    generator: NDArray[np.float64] | None = field(default=None, repr=False)
    scale_tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        if not 1 <= self.dimension <= MAX_DIMENSION:
            raise LatticeError(
                f"dimension must be in 1..{MAX_DIMENSION}, got {self.dimension}"
            )
        if (self.scale is None) == (self.generator is None):
            raise LatticeError("exactly one of scale or generator must be given")
        if self.scale is not None:
            if not math.isfinite(self.scale) or self.scale <= 0:
                raise LatticeError(f"scale must be positive, got {self.scale}")
            object.__setattr__(self, "scale", float(self.scale))
            return

        matrix = np.array(self.generator, dtype=np.float64)
        if matrix.shape != (self.dimension, self.dimension):
            raise LatticeError(
                f"generator must be {self.dimension}x{self.dimension}, "
                f"got shape {matrix.shape}"
            )
        if not np.all(np.isfinite(matrix)):
            raise LatticeError("generator has non-finite entries")
        if abs(np.linalg.det(matrix)) <= self.scale_tolerance:
            raise LatticeError("generator matrix is not full rank")
        matrix.setflags(write=False)
        object.__setattr__(self, "generator", matrix)

    @classmethod
    def uniform(cls, dimension: int, scale: float) -> "Lattice":
        """Build the uniform-scale lattice scale·Zⁿ."""
        return cls(dimension=dimension, scale=scale)

    @classmethod
    def from_generator(cls, matrix: ArrayLike) -> "Lattice":
        """Build a lattice from a square generator matrix (columns are basis vectors)."""
        array = np.asarray(matrix, dtype=np.float64)
        if array.ndim != 2:
            raise LatticeError(f"generator must be 2-D, got {array.ndim}-D")
        return cls(dimension=array.shape[0], generator=array)

    @property
    def is_uniform(self) -> bool:
        """True for the Δ·Zⁿ form."""
        return self.scale is not None

    @property
    def generator_matrix(self) -> NDArray[np.float64]:
        """Generator matrix, Δ·I for uniform-scale lattices."""
        if self.generator is not None:
            return self.generator
        return self.scale * np.eye(self.dimension)

    @property
    def length_scale(self) -> float:
        """Characteristic basis length, used to make tolerances relative."""
        if self.scale is not None:
            return self.scale
        return float(np.mean(np.linalg.norm(self.generator, axis=0)))

    @property
    def point_tolerance(self) -> float:
        """Absolute tolerance for comparing points of this lattice."""
        return self.scale_tolerance * self.length_scale

    def volume(self) -> float:
        """Volume of the fundamental Voronoi region, |det G|."""
        if self.scale is not None:
            return self.scale**self.dimension
        return float(abs(np.linalg.det(self.generator)))

    def contains(self, x: ArrayLike) -> bool:
        """Whether every row of x is a lattice point within tolerance."""
        points = _as_points(self, x)
        residual = points - nearest_point(self, points)
        return bool(np.all(np.abs(residual) <= self.point_tolerance))


@dataclass(frozen=True, eq=False)
class NestedPair:
    """A coarse lattice nested in a fine lattice (coarse ⊆ fine)."""

    coarse: Lattice
    fine: Lattice
    # Coarse basis in fine-basis integer coordinates, set in __post_init__
    index_matrix: NDArray[np.int64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.coarse.dimension != self.fine.dimension:
            raise LatticeError(
                f"dimension mismatch: coarse {self.coarse.dimension}, "
                f"fine {self.fine.dimension}"
            )
        relative = np.linalg.solve(
            self.fine.generator_matrix, self.coarse.generator_matrix
        )
        rounded = np.rint(relative)
        tolerance = self.fine.scale_tolerance * np.maximum(1.0, np.abs(relative))
        if np.any(np.abs(relative - rounded) > tolerance):
            raise LatticeError("coarse lattice is not nested in the fine lattice")
        if self.coarse.volume() < self.fine.volume() * (1 - self.fine.scale_tolerance):
            raise LatticeError("coarse Voronoi volume is smaller than the fine one")
        index_matrix = rounded.astype(np.int64)
        index_matrix.setflags(write=False)
        object.__setattr__(self, "index_matrix", index_matrix)

    @property
    def index(self) -> int:
        """Number of fine cosets per coarse cell, |det M|."""
        return int(round(abs(np.linalg.det(self.index_matrix))))


@dataclass(frozen=True, eq=False)
class DitherVector:
    """A vector in the fundamental Voronoi region of ``lattice``."""

    value: NDArray[np.float64]
    lattice: Lattice

    def __post_init__(self) -> None:
        value = np.array(self.value, dtype=np.float64).reshape(-1)
        if value.shape != (self.lattice.dimension,):
            raise LatticeError(
                f"dither has {value.size} components, "
                f"lattice dimension is {self.lattice.dimension}"
            )
        if np.any(np.abs(nearest_point(self.lattice, value)) > 0):
            raise LatticeError("dither lies outside the fundamental Voronoi region")
        value.setflags(write=False)
        object.__setattr__(self, "value", value)


def _as_points(lat: Lattice, x: ArrayLike) -> NDArray[np.float64]:
    """Validate x as one point or a stack of points with trailing dimension n."""
    points = np.asarray(x, dtype=np.float64)
    if points.ndim == 0:
        points = points.reshape(1)
    if points.shape[-1] != lat.dimension:
        raise LatticeError(
            f"dimension mismatch: expected {lat.dimension}, got {points.shape[-1]}"
        )
    if not np.all(np.isfinite(points)):
        raise LatticeError("input contains non-finite values")
    return points


def _round_half_down(values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Round to the nearest integer, .5 ties toward -inf."""
    return np.ceil(values - 0.5)


def _offset_block(dimension: int, start: int, stop: int) -> NDArray[np.int64]:
    """Rows start..stop of {-1,0,1}^n in lexicographic order."""
    index = np.arange(start, stop, dtype=np.int64)
    powers = 3 ** np.arange(dimension - 1, -1, -1, dtype=np.int64)
    return (index[:, None] // powers[None, :]) % 3 - 1


def _search_nearest(lat: Lattice, points: NDArray[np.float64]) -> NDArray[np.float64]:
    """Babai rounding plus exhaustive {-1,0,1}^n offset search."""
    n = lat.dimension
    basis = lat.generator_matrix
    babai = _round_half_down(np.linalg.solve(basis, points.T).T)
    tie_tolerance = lat.scale_tolerance * lat.length_scale**2
    total = 3**n

    best_dist = np.full(points.shape[0], np.inf)
    best_coords = babai.copy()

    for start in range(0, total, _OFFSET_BLOCK):
        offsets = _offset_block(n, start, min(total, start + _OFFSET_BLOCK))
        shifts = offsets @ basis.T
        chunk = max(1, _SEARCH_BUDGET // len(offsets))
        for lo in range(0, points.shape[0], chunk):
            hi = min(points.shape[0], lo + chunk)
            residual = points[lo:hi] - babai[lo:hi] @ basis.T
            diff = residual[:, None, :] - shifts[None, :, :]
            dist = np.einsum("ijk,ijk->ij", diff, diff)
            block_min = dist.min(axis=1)
            # First index within tolerance of the minimum keeps lexicographic order
            pick = np.argmax(dist <= block_min[:, None] + tie_tolerance, axis=1)
            picked = dist[np.arange(hi - lo), pick]
            better = picked < best_dist[lo:hi] - tie_tolerance
            rows = np.nonzero(better)[0] + lo
            best_dist[rows] = picked[better]
            best_coords[rows] = babai[rows] + offsets[pick[better]]

    return best_coords @ basis.T


def nearest_point(lat: Lattice, x: ArrayLike) -> NDArray[np.float64]:
    """Nearest lattice point to x.

    Uniform-scale lattices round componentwise with .5 ties toward -inf.
    Generator lattices use Babai rounding followed by an exhaustive search
    over {-1,0,1}ⁿ offsets, breaking distance ties by the lexicographic
    order of the integer coordinates.

    Args:
        lat: Lattice to quantize onto.
        x: A point or a stack of points with trailing dimension n.

    Returns:
        Lattice point(s) with the same shape as x.

    Raises:
        LatticeError: On dimension mismatch or non-finite input.
    """
    points = _as_points(lat, x)
    if lat.scale is not None:
        return lat.scale * _round_half_down(points / lat.scale)
    flat = points.reshape(-1, lat.dimension)
    return _search_nearest(lat, flat).reshape(points.shape)


def mod_lattice(lat: Lattice, x: ArrayLike) -> NDArray[np.float64]:
    """Reduce x into the fundamental Voronoi region: x - Q(x)."""
    points = _as_points(lat, x)
    return points - nearest_point(lat, points)


def scale_lattice(lat: Lattice, c: float) -> Lattice:
    """Multiply every basis vector by c > 0."""
    if not math.isfinite(c) or c <= 0:
        raise LatticeError(f"scale factor must be positive, got {c}")
    if lat.scale is not None:
        return Lattice(
            lat.dimension, scale=lat.scale * c, scale_tolerance=lat.scale_tolerance
        )
    return Lattice(
        lat.dimension, generator=lat.generator * c, scale_tolerance=lat.scale_tolerance
    )


def _covering_half_width(lat: Lattice) -> float:
    """Half-width of an axis-aligned box containing the Voronoi region."""
    return 0.5 * float(np.sum(np.linalg.norm(lat.generator_matrix, axis=0)))


def draw_voronoi_uniform(
    lat: Lattice,
    rng: np.random.Generator,
    size: int | None = None,
) -> NDArray[np.float64]:
    """Draw points uniformly over the fundamental Voronoi region.

    Uniform-scale lattices sample componentwise on (-Δ/2, Δ/2], the cell
    that matches the quantizer's tie-breaking. Generator lattices draw in
    the fundamental parallelepiped and reduce modulo the lattice.

    Args:
        lat: Lattice whose Voronoi region is sampled.
        rng: Source of randomness.
        size: Number of points, or None for a single n-vector.

    Returns:
        Array of shape (n,) or (size, n).
    """
    shape = (lat.dimension,) if size is None else (size, lat.dimension)
    if lat.scale is not None:
        return lat.scale * (0.5 - rng.random(shape))
    coords = rng.random(shape)
    return mod_lattice(lat, coords @ lat.generator.T)


def sample_dither(lat: Lattice, seed: int) -> DitherVector:
    """Draw a dither uniform over the Voronoi region, deterministic in seed."""
    rng = np.random.default_rng(seed)
    return DitherVector(draw_voronoi_uniform(lat, rng), lat)


def second_moment(
    lat: Lattice,
    mode: SecondMomentMode = "exact",
    *,
    trials: int = DEFAULT_MC_TRIALS,
    seed: int = 0,
) -> float:
    """Second moment σ²(Λ) per dimension.

    Args:
        lat: Lattice to evaluate.
        mode: "exact" (uniform-scale only, Δ²/12) or "monte_carlo".
        trials: Accepted Monte-Carlo samples (at least 1000).
        seed: Monte-Carlo seed.

    Returns:
        Average ‖u‖²/n for u uniform over the Voronoi region.

    Raises:
        LatticeError: Exact mode on a generator lattice, or too few trials.
    """
    if mode == "exact":
        if lat.scale is None:
            raise LatticeError("exact second moment needs a uniform-scale lattice")
        return lat.scale**2 / 12.0
    if mode != "monte_carlo":
        raise LatticeError(f"unknown second moment mode: {mode!r}")
    if trials < MIN_MC_TRIALS:
        raise LatticeError(f"need at least {MIN_MC_TRIALS} trials, got {trials}")

    rng = np.random.default_rng(seed)
    n = lat.dimension
    if lat.scale is not None:
        half_width = lat.scale / 2
    else:
        half_width = _covering_half_width(lat)

    accepted = 0
    total = 0.0
    batch = max(MIN_MC_TRIALS, min(trials, 200_000))
    while accepted < trials:
        candidates = rng.uniform(-half_width, half_width, size=(batch, n))
        inside = candidates[
            np.all(np.abs(nearest_point(lat, candidates)) <= lat.point_tolerance, axis=1)
        ]
        take = inside[: trials - accepted]
        total += float(np.sum(take * take))
        accepted += len(take)

    result = total / (trials * n)
    logger.debug("Monte-Carlo second moment: %.6g over %d samples", result, trials)
    return result


def normalized_second_moment(
    lat: Lattice, mode: SecondMomentMode = "exact", **kwargs
) -> float:
    """Dimensionless G(Λ) = σ²/Vol^(2/n); 1/12 for any cubic lattice."""
    sigma2 = second_moment(lat, mode, **kwargs)
    return sigma2 / lat.volume() ** (2.0 / lat.dimension)


def shaping_loss_db(
    lat: Lattice, mode: SecondMomentMode = "exact", **kwargs
) -> float:
    """Shaping loss 10·log10(2πe·G) against a sphere-like Voronoi region."""
    g = normalized_second_moment(lat, mode, **kwargs)
    return 10 * math.log10(2 * math.pi * math.e * g)


def lattice_points_near(
    lat: Lattice, x: ArrayLike, cells: int = 3
) -> NDArray[np.float64]:
    """Enumerate lattice points whose integer coordinates lie within ±cells of x's."""
    point = _as_points(lat, x).reshape(lat.dimension)
    base = np.rint(np.linalg.solve(lat.generator_matrix, point))
    span = range(-cells, cells + 1)
    offsets = np.array(list(itertools.product(span, repeat=lat.dimension)), dtype=float)
    return (base + offsets) @ lat.generator_matrix.T
