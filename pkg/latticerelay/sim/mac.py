"""MAC - Dithered encoding, the uplink channel and relay decoding.

Each node sends X = [V − D] mod Λ. The relay scales its observation,
adds back the dithers and quantizes onto the decode lattice to estimate
the combination T. A node that knows its own codeword, dither and lattice
wrap recovers the other node's codeword from T.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from latticerelay.core.lattice import (
    DitherVector,
    Lattice,
    LatticeError,
    draw_voronoi_uniform,
    mod_lattice,
    nearest_point,
)
from latticerelay.sim.schemes import LatticeChain, SchemeKind

logger = logging.getLogger(__name__)


class RecoveryError(Exception):
    """Raised when a node cannot map the relay's estimate to a codeword."""

    pass


@dataclass(frozen=True)
class RelayEstimate:
    """Relay decision on T.

    Attributes:
        t_hat: Estimate reduced modulo the chain's outer lattice.
        t_hat_inner: Estimate when the relay first reduces modulo the
            inner lattice (differs from t_hat only in scheme 2 with g ≠ 1).
    """

    t_hat: NDArray[np.float64]
    t_hat_inner: NDArray[np.float64]


def _dither_value(d: DitherVector | ArrayLike) -> NDArray[np.float64]:
    if isinstance(d, DitherVector):
        return d.value
    return np.asarray(d, dtype=np.float64)


def encode_node(
    v: ArrayLike, d: DitherVector | ArrayLike, coarse: Lattice
) -> NDArray[np.float64]:
    """Transmit signal [v − d] mod coarse."""
    return mod_lattice(coarse, np.asarray(v, dtype=np.float64) - _dither_value(d))


def lattice_wrap(
    v: ArrayLike, d: DitherVector | ArrayLike, coarse: Lattice
) -> NDArray[np.float64]:
    """Coarse point λ removed by encoding, so that X = v − d − λ."""
    return nearest_point(coarse, np.asarray(v, dtype=np.float64) - _dither_value(d))


def mac_channel(
    x1: ArrayLike,
    x2: ArrayLike,
    g: float,
    n_r: float,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """Relay observation Y = x1 + √g·x2 + Z with Z ~ N(0, n_r) i.i.d."""
    x1 = np.asarray(x1, dtype=np.float64)
    y = x1 + math.sqrt(g) * np.asarray(x2, dtype=np.float64)
    if n_r > 0:
        y = y + rng.normal(0.0, math.sqrt(n_r), size=x1.shape)
    return y


def _dithered_observation(
    y: ArrayLike, d1: ArrayLike, d2: ArrayLike, chain: LatticeChain, alpha: float
) -> NDArray[np.float64]:
    return (
        alpha * np.asarray(y, dtype=np.float64)
        + _dither_value(d1)
        + chain.gain_factor * _dither_value(d2)
    )


def relay_decode_scheme1(
    y: ArrayLike, d1: ArrayLike, d2: ArrayLike, chain: LatticeChain, alpha: float
) -> RelayEstimate:
    """T̂ = [Q_fine([αy + D₁ + aD₂] mod Λ)] mod Λ."""
    combined = _dithered_observation(y, d1, d2, chain, alpha)
    t_hat = mod_lattice(
        chain.outer, nearest_point(chain.decode, mod_lattice(chain.outer, combined))
    )
    return RelayEstimate(t_hat=t_hat, t_hat_inner=t_hat)


def relay_decode_scheme2(
    y: ArrayLike, d1: ArrayLike, d2: ArrayLike, chain: LatticeChain, alpha: float
) -> RelayEstimate:
    """T̂ = [Q_C([αy + D₁ + √g D₂] mod outer)] mod outer.

    The inner estimate reduces modulo the finer of Λ₁ and Λ₃ before
    quantizing, and loses the wrap of that lattice when g ≠ 1.
    """
    combined = _dithered_observation(y, d1, d2, chain, alpha)
    outer = mod_lattice(
        chain.outer, nearest_point(chain.decode, mod_lattice(chain.outer, combined))
    )
    inner = mod_lattice(
        chain.outer, nearest_point(chain.decode, mod_lattice(chain.inner, combined))
    )
    return RelayEstimate(t_hat=outer, t_hat_inner=inner)


def relay_decode(
    y: ArrayLike, d1: ArrayLike, d2: ArrayLike, chain: LatticeChain, alpha: float
) -> RelayEstimate:
    """Decode with the chain's scheme."""
    if chain.config.kind is SchemeKind.SCHEME1:
        return relay_decode_scheme1(y, d1, d2, chain, alpha)
    return relay_decode_scheme2(y, d1, d2, chain, alpha)


def target_t(
    v1: ArrayLike,
    v2: ArrayLike,
    chain: LatticeChain,
    wrap1: ArrayLike | None = None,
    wrap2: ArrayLike | None = None,
) -> NDArray[np.float64]:
    """T = [(v1 − λ₁) + gain·(v2 − λ₂)] mod outer.

    With zero wraps this is [V₁ + aV₂] mod Λ or [V₁ + √g V₂] mod Λ₃.
    Wraps that lie in the outer lattice after scaling drop out.
    """
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    if wrap1 is not None:
        v1 = v1 - np.asarray(wrap1, dtype=np.float64)
    if wrap2 is not None:
        v2 = v2 - np.asarray(wrap2, dtype=np.float64)
    return mod_lattice(chain.outer, v1 + chain.gain_factor * v2)


def node2_recover(
    t_hat: ArrayLike,
    v2: ArrayLike,
    chain: LatticeChain,
    wrap2: ArrayLike | None = None,
) -> NDArray[np.float64]:
    """Node 2's estimate of V₁: [[T̂ − gain·(v2 − λ₂)] mod outer] mod Λ₁.

    Raises:
        RecoveryError: If the result is not a codeword of C₁.
    """
    own = np.asarray(v2, dtype=np.float64)
    if wrap2 is not None:
        own = own - np.asarray(wrap2, dtype=np.float64)
    residual = mod_lattice(
        chain.outer, np.asarray(t_hat, dtype=np.float64) - chain.gain_factor * own
    )
    estimate = mod_lattice(chain.shaping1, residual)
    try:
        return chain.codebook1.codeword(chain.codebook1.index_of(estimate))
    except LatticeError as e:
        raise RecoveryError(f"node 2 estimate is not a codeword: {e}") from e


def _solve_scheme1_combination(residual: NDArray[np.float64], chain: LatticeChain):
    """Solve a·v ≡ residual (mod Λ) for v on the fine lattice."""
    k = chain.config.resolution
    a = chain.config.coefficient
    coords = np.rint(residual / chain.decode.scale).astype(np.int64)
    return np.mod(coords * pow(a, -1, k), k) * chain.decode.scale


def node1_recover(
    t_hat: ArrayLike,
    v1: ArrayLike,
    chain: LatticeChain,
    wrap1: ArrayLike | None = None,
) -> NDArray[np.float64]:
    """Node 1's estimate of V₂ from T̂ and its own codeword.

    Raises:
        RecoveryError: If the result is not a codeword of C₂.
    """
    own = np.asarray(v1, dtype=np.float64)
    if wrap1 is not None:
        own = own - np.asarray(wrap1, dtype=np.float64)
    residual = mod_lattice(chain.outer, np.asarray(t_hat, dtype=np.float64) - own)
    gain = chain.gain_factor
    try:
        if chain.config.kind is SchemeKind.SCHEME1:
            if not chain.decode.contains(residual):
                raise LatticeError("residual is off the fine lattice")
            candidate = _solve_scheme1_combination(residual, chain)
        else:
            # √g·Λ₂ is the outer lattice for g ≥ 1 and the inner one below
            scaled_shaping = chain.outer if gain >= 1 else chain.inner
            candidate = mod_lattice(scaled_shaping, residual) / gain
        estimate = mod_lattice(chain.shaping2, candidate)
        return chain.codebook2.codeword(chain.codebook2.index_of(estimate))
    except LatticeError as e:
        raise RecoveryError(f"node 1 estimate is not a codeword: {e}") from e


def effective_noise_samples(
    chain: LatticeChain,
    n_r: float,
    alpha: float,
    trials: int,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """Draws of (α−1)X₁ + (α√g − a)X₂ + αZ_R through the encoder chain.

    Returns:
        Array of shape (trials, n).
    """
    g = chain.config.g
    n = chain.shaping1.dimension
    c1, c2 = chain.codebook1, chain.codebook2
    v1 = c1.codewords[rng.integers(len(c1), size=trials)]
    v2 = c2.codewords[rng.integers(len(c2), size=trials)]
    x1 = encode_node(v1, draw_voronoi_uniform(chain.shaping1, rng, trials), chain.shaping1)
    x2 = encode_node(v2, draw_voronoi_uniform(chain.shaping2, rng, trials), chain.shaping2)
    z = rng.normal(0.0, math.sqrt(n_r), size=(trials, n)) if n_r > 0 else 0.0
    return (
        (alpha - 1.0) * x1
        + (alpha * math.sqrt(g) - chain.gain_factor) * x2
        + alpha * z
    )
