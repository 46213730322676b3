"""Channel - Two-way relay channel parameters and rectangular rate regions."""

import math
from dataclasses import dataclass, replace

# Tolerance used by RateRegion.contains
REGION_TOLERANCE = 1e-12


class RateDomainError(Exception):
    """Raised when a rate formula is evaluated outside its domain."""

    pass


@dataclass(frozen=True)
class ChannelParams:
    """Gaussian two-way relay channel.

    Attributes:
        P: Source power at both nodes (linear).
        P_R: Relay power.
        g: Channel power gain of node 2 toward the relay.
        N_R: Relay noise variance.
        N_1: Noise variance at node 1.
        N_2: Noise variance at node 2.
    """

    P: float
    P_R: float
    g: float
    N_R: float
    N_1: float
    N_2: float

    def __post_init__(self) -> None:
        for name in ("P", "P_R", "N_R", "N_1", "N_2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise RateDomainError(f"{name} must be positive, got {value}")
        if not math.isfinite(self.g) or self.g < 0:
            raise RateDomainError(f"g must be nonnegative, got {self.g}")

    @classmethod
    def symmetric_model(cls, snr: float, g: float, noise: float = 1.0) -> "ChannelParams":
        """P = P_R = snr·noise and all noise variances equal."""
        power = snr * noise
        return cls(P=power, P_R=power, g=g, N_R=noise, N_1=noise, N_2=noise)

    def symmetric(self) -> bool:
        """True iff P = P_R and N_1 = N_2 = N_R."""
        return self.P == self.P_R and self.N_1 == self.N_2 == self.N_R

    @property
    def snr(self) -> float:
        """Uplink SNR P/N_R."""
        return self.P / self.N_R

    def with_snr(self, snr: float) -> "ChannelParams":
        """Same channel with P rescaled so that P/N_R = snr (P_R follows if symmetric)."""
        power = snr * self.N_R
        if self.symmetric():
            return replace(self, P=power, P_R=power)
        return replace(self, P=power)


@dataclass(frozen=True)
class RateRegion:
    """Rectangle {(R₁, R₂): R₁ ≤ r1_max, R₂ ≤ r2_max} in bits per channel use."""

    r1_max: float
    r2_max: float

    def __post_init__(self) -> None:
        if self.r1_max < 0 or self.r2_max < 0:
            raise RateDomainError(
                f"rate caps must be nonnegative, got ({self.r1_max}, {self.r2_max})"
            )

    def contains(self, r1: float, r2: float) -> bool:
        """Whether (r1, r2) is achievable."""
        return (
            0 <= r1 <= self.r1_max + REGION_TOLERANCE
            and 0 <= r2 <= self.r2_max + REGION_TOLERANCE
        )

    def within(self, other: "RateRegion", tol: float = REGION_TOLERANCE) -> bool:
        """Componentwise containment in another rectangle."""
        return self.r1_max <= other.r1_max + tol and self.r2_max <= other.r2_max + tol

    @property
    def sum_rate(self) -> float:
        return self.r1_max + self.r2_max
