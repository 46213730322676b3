"""Exponent - Poltyrev error exponent and lattice decoding error bounds.

Exponents are in natural units (nats per dimension).
"""

import math

from latticerelay.core.channel import RateDomainError
from latticerelay.core.lattice import Lattice

# Volume-to-noise ratio above which Poltyrev-good lattices decode reliably
POLTYREV_THRESHOLD = 2 * math.pi * math.e


def poltyrev_exponent(x: float) -> float:
    """E_P(x) for a volume-to-noise ratio x normalised so that x = 1 at capacity.

    Args:
        x: Ratio ≥ 1.

    Returns:
        (x−1)/2 − ½ln x on [1, 2], ½(1 + ln(x/4)) on [2, 4], x/8 above 4.

    Raises:
        RateDomainError: If x < 1.
    """
    if not x >= 1:
        raise RateDomainError(f"Poltyrev exponent needs x >= 1, got {x}")
    if x <= 2:
        return (x - 1.0) / 2.0 - 0.5 * math.log(x)
    if x <= 4:
        return 0.5 * (1.0 + math.log(x / 4.0))
    return x / 8.0


def error_prob_bound(n: int, r: float, r_star: float) -> float:
    """Upper bound exp(−n·E_P(2^(2(r* − r)))) on the relay's decoding error.

    Args:
        n: Blocklength (lattice dimension).
        r: Code rate in bits.
        r_star: Decoding threshold in bits.

    Raises:
        RateDomainError: If n < 1 or r ≥ r_star.
    """
    if n < 1:
        raise RateDomainError(f"blocklength must be positive, got {n}")
    if not r < r_star:
        raise RateDomainError(f"bound is vacuous for r={r} >= r_star={r_star}")
    return math.exp(-n * poltyrev_exponent(2.0 ** (2.0 * (r_star - r))))


def volume_to_noise_ratio(lat: Lattice, noise_var: float) -> float:
    """μ = Vol^(2/n)/N; Poltyrev-good lattices need μ above 2πe."""
    if noise_var <= 0:
        raise RateDomainError(f"noise variance must be positive, got {noise_var}")
    return lat.volume() ** (2.0 / lat.dimension) / noise_var
