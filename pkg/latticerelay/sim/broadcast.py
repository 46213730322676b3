"""Broadcast - Relay re-encoding of T and ML decoding at the nodes.

The relay maps the index of its estimate T̂ one-to-one onto a row of a
seeded Gaussian codebook and broadcasts it. Each node decodes by minimum
Euclidean distance over the full codebook.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from latticerelay.sim.schemes import SimulationConfigError

logger = logging.getLogger(__name__)

# Upper bound on broadcast codebook rows
MAX_BROADCAST_SIZE = 4096


@dataclass(frozen=True, eq=False)
class RelayCodebook:
    """Gaussian broadcast codebook with power P_R per symbol."""

    codewords: NDArray[np.float64] = field(repr=False)
    power: float

    @classmethod
    def generate(
        cls, size: int, blocklength: int, power: float, seed: np.random.SeedSequence
    ) -> "RelayCodebook":
        """Draw a size × blocklength codebook of i.i.d. N(0, power) symbols."""
        if not 1 <= size <= MAX_BROADCAST_SIZE:
            raise SimulationConfigError(
                f"broadcast codebook size must be in 1..{MAX_BROADCAST_SIZE}, got {size}"
            )
        if blocklength < 1:
            raise SimulationConfigError(
                f"broadcast blocklength must be positive, got {blocklength}"
            )
        if not power > 0:
            raise SimulationConfigError(f"relay power must be positive, got {power}")
        rng = np.random.default_rng(seed)
        codewords = rng.normal(0.0, math.sqrt(power), size=(size, blocklength))
        codewords.setflags(write=False)
        return cls(codewords=codewords, power=power)

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    @property
    def blocklength(self) -> int:
        return self.codewords.shape[1]

    @property
    def rate(self) -> float:
        """log₂(size)/blocklength bits per channel use."""
        return math.log2(self.size) / self.blocklength


def broadcast_phase(
    t_index: int,
    codebook: RelayCodebook,
    noise_var: float,
    rng: np.random.Generator,
) -> int:
    """Send codeword t_index over an AWGN link and decode by nearest codeword.

    Args:
        t_index: Row to transmit.
        codebook: Relay codebook.
        noise_var: Noise variance at the receiving node (0 for a clean link).
        rng: Trial generator.

    Returns:
        Decoded row index; a wrong index is a measured event.
    """
    if not 0 <= t_index < codebook.size:
        raise IndexError(f"t_index {t_index} outside codebook of {codebook.size}")
    sent = codebook.codewords[t_index]
    received = sent
    if noise_var > 0:
        received = sent + rng.normal(0.0, math.sqrt(noise_var), size=sent.shape)
    if codebook.size == 1:
        return 0
    diff = codebook.codewords - received
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
