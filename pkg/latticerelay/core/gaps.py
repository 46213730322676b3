"""Gaps - Distance between the cut-set bound and the scheme-2 region.

Per-user and sum-rate gaps for the symmetric model (P = P_R, equal noise
variances), as functions of the channel gain g alone.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import optimize

from latticerelay.core.channel import ChannelParams, RateDomainError
from latticerelay.core.envelope import LN2, tangent_point, uce_rate
from latticerelay.core.rates import clip_plus, cutset_region, r2_curve, scheme2_region

logger = logging.getLogger(__name__)

# SNR grid for the numeric supremum in gap_r2_high
SUP_GRID_MIN = 1e-6
SUP_GRID_MAX = 1e6
SUP_GRID_POINTS = 10_000
SUP_REFINE_XTOL = 1e-8

Regime = Literal["g<1", "g=1", "g>1"]


@dataclass(frozen=True)
class GapReport:
    """Gap bounds at one channel gain."""

    g: float
    gap_r1: float
    gap_r2: float
    gap_sum: float
    regime: Regime
    r2_branch_active: bool


def gap_r1(g: float) -> float:
    """Largest gap for R₁ over all SNR.

    Raises:
        RateDomainError: If g ≤ 0.
    """
    if not g > 0:
        raise RateDomainError(f"gap_r1 needs g > 0, got {g}")
    c = 1.0 / (g + 1.0)
    x = tangent_point(c, 1.0)
    u = x + c
    linear_part = 0.5 * math.log2(u) - (x - g / (g + 1.0)) / (2 * LN2 * u)
    log_part = 0.5 * math.log2(1.0 + (g / (g + 1.0)) / u)
    return max(linear_part, log_part)


def gap_r2_low(g: float) -> float:
    """Largest gap for R₂ when 0 < g < 1.

    Raises:
        RateDomainError: If g is outside (0, 1).
    """
    if not 0 < g < 1:
        raise RateDomainError(f"gap_r2_low needs 0 < g < 1, got {g}")
    offset = g / (g + 1.0)
    x = tangent_point(offset, g)
    u = g * x + offset
    linear_part = 0.5 * math.log2(u) - (g * x - 1.0 / (g + 1.0)) / (2 * LN2 * u)
    log_part = 0.5 * math.log2((g * x + 1.0) / u)
    return max(linear_part, log_part)


def _r2_high_gap(g: float) -> tuple[float, bool]:
    """Supremum of ½log₂(1+x) − uce₂(x) and whether the no-crossing branch applied."""
    curve = r2_curve(g)
    # The envelope's line stays above the outer curve iff it starts steeper
    if curve.slope >= 1.0 / (2 * LN2):
        return 0.0, True

    def gap_at(snr):
        return 0.5 * np.log2(1.0 + snr) - uce_rate(curve, snr)

    grid = np.geomspace(SUP_GRID_MIN, SUP_GRID_MAX, SUP_GRID_POINTS)
    values = gap_at(grid)
    i = int(np.argmax(values))
    if i in (0, len(grid) - 1):
        logger.warning("gap_r2_high(%g): supremum at the grid boundary", g)
        return clip_plus(float(values[i])), False

    result = optimize.minimize_scalar(
        lambda snr: -gap_at(snr),
        bounds=(grid[i - 1], grid[i + 1]),
        method="bounded",
        options={"xatol": SUP_REFINE_XTOL},
    )
    best = max(float(values[i]), -float(result.fun))
    logger.debug("gap_r2_high(%g): %.10g at snr=%.6g", g, best, result.x)
    return clip_plus(best), False


def gap_r2_high(g: float) -> float:
    """Largest gap for R₂ when g ≥ 1 (zero when the envelope never dips below the bound).

    Raises:
        RateDomainError: If g < 1.
    """
    if not g >= 1:
        raise RateDomainError(f"gap_r2_high needs g >= 1, got {g}")
    return _r2_high_gap(g)[0]


def gap_sum(g: float) -> float:
    """Sum-rate gap: the R₁ bound plus the regime's R₂ bound.

    Raises:
        RateDomainError: If g ≤ 0.
    """
    return gap_report(g).gap_sum


def gap_report(g: float) -> GapReport:
    """All gap bounds at channel gain g > 0."""
    if not g > 0:
        raise RateDomainError(f"gap needs g > 0, got {g}")
    r1 = gap_r1(g)
    if g < 1:
        r2, branch = gap_r2_low(g), False
        regime: Regime = "g<1"
    else:
        r2, branch = _r2_high_gap(g)
        regime = "g=1" if g == 1 else "g>1"
    return GapReport(
        g=g,
        gap_r1=r1,
        gap_r2=r2,
        gap_sum=r1 + r2,
        regime=regime,
        r2_branch_active=branch,
    )


def scheme2_gap(p: ChannelParams) -> tuple[float, float]:
    """Per-user distance from the scheme-2 region to the cut-set bound at p."""
    outer = cutset_region(p)
    inner = scheme2_region(p)
    return outer.r1_max - inner.r1_max, outer.r2_max - inner.r2_max
