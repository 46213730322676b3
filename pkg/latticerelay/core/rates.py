"""Rates - Achievable rates and outer bounds for the two-way relay channel.

Scheme 1 decodes the integer combination V₁ + aV₂ at the relay with a
single fine lattice. Scheme 2 uses nested lattice partition chains scaled
by √g so that each user gets its own rate, time sharing where the rate
curve dips below zero. All rates are in bits per real channel use.
"""

import math

from latticerelay.core.channel import ChannelParams, RateDomainError, RateRegion
from latticerelay.core.envelope import UceCurve, uce_rate


def clip_plus(x: float) -> float:
    """[x]⁺ = max(0, x)."""
    return max(0.0, x)


def _half_log2(x: float) -> float:
    return 0.5 * math.log2(x)


def nearest_integer_coefficient(g: float) -> int:
    """a = ⌈√g⌋, half-integers rounding up, never below 1.

    A zero coefficient drops node 2 from the relay's combination, so
    g < 1/4 still uses a = 1.
    """
    return max(1, math.floor(math.sqrt(g) + 0.5))


def mmse_coefficient(P: float, g: float, N_R: float, a: float) -> float:
    """(a√g + 1)P / ((g+1)P + N_R) on raw values; N_R may be 0."""
    return (a * math.sqrt(g) + 1.0) * P / ((g + 1.0) * P + N_R)


def alpha_mmse_scheme1(p: ChannelParams, a: int) -> float:
    """MMSE scaling for the relay's combination V₁ + aV₂."""
    return mmse_coefficient(p.P, p.g, p.N_R, a)


def alpha_mmse_scheme2(p: ChannelParams) -> float:
    """MMSE scaling for the √g-scaled combination, (g+1)P / ((g+1)P + N_R)."""
    return (p.g + 1.0) * p.P / ((p.g + 1.0) * p.P + p.N_R)


def effective_noise(P: float, g: float, N_R: float, a: float, alpha: float) -> float:
    """((α√g − a)² + (α−1)²)P + α²N_R on raw values."""
    return ((alpha * math.sqrt(g) - a) ** 2 + (alpha - 1.0) ** 2) * P + alpha**2 * N_R


def scheme1_effective_noise(p: ChannelParams, a: int, alpha: float) -> float:
    """Variance N_eq of (α−1)X₁ + (α√g − a)X₂ + αZ_R."""
    return effective_noise(p.P, p.g, p.N_R, a, alpha)


def scheme2_effective_noise(p: ChannelParams, alpha: float) -> float:
    """Variance of the scheme-2 effective noise, the coefficient being √g."""
    return effective_noise(p.P, p.g, p.N_R, math.sqrt(p.g), alpha)


def scheme1_mac_rate(p: ChannelParams) -> float:
    """Common MAC rate ½log₂(P/N_eq) at the MMSE α and a = ⌈√g⌋, clipped at 0."""
    a = nearest_integer_coefficient(p.g)
    alpha = alpha_mmse_scheme1(p, a)
    return clip_plus(_half_log2(p.P / scheme1_effective_noise(p, a, alpha)))


def r1_curve(g: float) -> UceCurve:
    """Envelope of ½log₂(1/(g+1) + x)."""
    return UceCurve.for_curve(1.0 / (g + 1.0), 1.0)


def r2_curve(g: float) -> UceCurve:
    """Envelope of ½log₂(g/(g+1) + g·x), g > 0."""
    if g <= 0:
        raise RateDomainError(f"node 2 curve needs g > 0, got {g}")
    return UceCurve.for_curve(g / (g + 1.0), g)


def scheme2_mac_rates(p: ChannelParams) -> tuple[float, float]:
    """Relay decoding thresholds (r1_star, r2_star) without time sharing."""
    snr = p.snr
    r1 = clip_plus(_half_log2(1.0 / (p.g + 1.0) + snr))
    if p.g == 0:
        return r1, 0.0
    r2 = clip_plus(_half_log2(p.g / (p.g + 1.0) + p.g * snr))
    return r1, r2


def scheme2_envelope_rates(p: ChannelParams) -> tuple[float, float]:
    """MAC rates after time sharing (the u.c.e. of each user's curve)."""
    r1 = uce_rate(r1_curve(p.g), p.snr)
    if p.g == 0:
        return r1, 0.0
    return r1, uce_rate(r2_curve(p.g), p.snr)


def downlink_rates(p: ChannelParams) -> tuple[float, float]:
    """Broadcast caps: R₁ limited by node 2's link, R₂ by node 1's."""
    return _half_log2(1.0 + p.P_R / p.N_2), _half_log2(1.0 + p.P_R / p.N_1)


def scheme1_region(p: ChannelParams) -> RateRegion:
    """Compute-and-forward region with a common MAC rate."""
    mac = scheme1_mac_rate(p)
    cap1, cap2 = downlink_rates(p)
    return RateRegion(min(mac, cap1), min(mac, cap2))


def scheme2_region(p: ChannelParams) -> RateRegion:
    """Partition-chain region with per-user time-shared MAC rates."""
    mac1, mac2 = scheme2_envelope_rates(p)
    cap1, cap2 = downlink_rates(p)
    return RateRegion(min(mac1, cap1), min(mac2, cap2))


def cutset_region(p: ChannelParams) -> RateRegion:
    """Cut-set outer bound."""
    cap1, cap2 = downlink_rates(p)
    return RateRegion(
        min(_half_log2(1.0 + p.P / p.N_R), cap1),
        min(_half_log2(1.0 + p.g * p.P / p.N_R), cap2),
    )


def high_snr_region(p: ChannelParams) -> RateRegion:
    """Region reached with α = 1 at high SNR.

    Raises:
        RateDomainError: If P/N_R ≤ 1 or gP/N_R ≤ 1.
    """
    snr = p.snr
    if snr <= 1 or p.g * snr <= 1:
        raise RateDomainError(
            f"high-SNR region needs P/N_R > 1 and gP/N_R > 1, got {snr}, {p.g * snr}"
        )
    cap1, cap2 = downlink_rates(p)
    return RateRegion(min(_half_log2(snr), cap1), min(_half_log2(p.g * snr), cap2))


def nested_rate_offset(p1: float, p2: float) -> float:
    """Rate difference ½log₂(P₂/P₁) between codebooks sharing a fine lattice."""
    if p1 <= 0 or p2 <= 0:
        raise RateDomainError(f"second moments must be positive, got {p1}, {p2}")
    return _half_log2(p2 / p1)
