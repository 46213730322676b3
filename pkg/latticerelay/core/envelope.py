"""Envelope - Upper convex envelope of ½log₂(c + b·x) by time sharing.

For c < 1 the curve is negative near the origin. Time sharing between the
origin and a tangent point x* gives the envelope: the line through the
origin tangent to the curve up to x*, then the curve itself.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize

from latticerelay.core.channel import RateDomainError

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

# Bisection settings for the tangent equation
ROOT_XTOL = 1e-14
ROOT_MAXITER = 200
RESIDUAL_TOL = 1e-8


def log_curve(c: float, b: float, x: ArrayLike) -> NDArray[np.float64] | float:
    """f(x) = ½log₂(c + b·x), possibly negative."""
    values = 0.5 * np.log2(c + b * np.asarray(x, dtype=np.float64))
    return float(values) if np.ndim(values) == 0 else values


def tangent_residual(c: float, b: float, x: float) -> float:
    """b·x/(c + b·x) − ln(c + b·x), zero at the tangent point."""
    u = c + b * x
    return b * x / u - math.log(u)


def tangent_point(c: float, b: float) -> float:
    """Solve for the tangent point x* of the envelope.

    The root is bracketed in u = c + b·x, where the residual
    ln u − 1 + c/u changes sign exactly once on [1, e] for 0 < c < 1.
    Since x = (u − c)/b is one-to-one, this is the same as bracketing x
    on [(1 − c)/b, (e − c)/b]. For both user curves at any gain
    1e-8 ≤ g ≤ 1e6 that interval lies inside [1e-12, 1e9]. The u tolerance
    of 1e-14 maps to an x tolerance of 1e-14/b, within 1e-10 whenever
    b ≥ 1e-4.

    Args:
        c: Additive constant inside the log, 0 < c < 1.
        b: Positive gain on x inside the log.

    Returns:
        x* > 0 solving b·x/(c + b·x) = ln(c + b·x).

    Raises:
        RateDomainError: If c ≥ 1 (the curve already passes through the
            origin and needs no time sharing), c ≤ 0 or b ≤ 0.
    """
    if not 0 < c:
        raise RateDomainError(f"offset c must be positive, got {c}")
    if c >= 1:
        raise RateDomainError(f"offset c={c} needs no time sharing")
    if not b > 0:
        raise RateDomainError(f"gain b must be positive, got {b}")

    def residual(u: float) -> float:
        return math.log(u) - 1.0 + c / u

    try:
        u, info = optimize.bisect(
            residual,
            1.0,
            math.e,
            xtol=ROOT_XTOL,
            maxiter=ROOT_MAXITER,
            full_output=True,
        )
    except ValueError as e:
        raise AssertionError(f"tangent equation has no sign change: {e}") from e

    x_star = (u - c) / b
    check = tangent_residual(c, b, x_star)
    assert abs(check) < RESIDUAL_TOL, f"tangent residual {check:.3g} at x*={x_star}"
    logger.debug(
        "Tangent point c=%.6g b=%.6g: x*=%.12g after %d iterations",
        c,
        b,
        x_star,
        info.iterations,
    )
    return x_star


@dataclass(frozen=True)
class UceCurve:
    """Upper convex envelope of f(x) = ½log₂(offset + gain·x).

    When offset ≥ 1 the curve is its own envelope; tangent_point is then 0
    and slope is f′(0).
    """

    offset: float
    gain: float
    tangent_point: float
    slope: float

    @classmethod
    def for_curve(cls, offset: float, gain: float) -> "UceCurve":
        """Build the envelope of ½log₂(offset + gain·x)."""
        if offset <= 0 or gain <= 0:
            raise RateDomainError(
                f"envelope needs positive offset and gain, got ({offset}, {gain})"
            )
        if offset >= 1:
            return cls(offset, gain, 0.0, gain / (2 * LN2 * offset))
        x_star = tangent_point(offset, gain)
        slope = gain / (2 * LN2 * (offset + gain * x_star))
        return cls(offset, gain, x_star, slope)

    def raw(self, snr: ArrayLike) -> NDArray[np.float64] | float:
        """The underlying curve ½log₂(offset + gain·snr)."""
        return log_curve(self.offset, self.gain, snr)

    @property
    def tangent_rate(self) -> float:
        """f(x*), the rate where the line meets the curve."""
        return float(self.raw(self.tangent_point))


def uce_rate(curve: UceCurve, snr: ArrayLike) -> NDArray[np.float64] | float:
    """Evaluate the envelope.

    Args:
        curve: Envelope to evaluate.
        snr: Nonnegative SNR (scalar or array).

    Returns:
        slope·snr below x*, ½log₂(c + b·snr) at or above x*.

    Raises:
        RateDomainError: If any snr is negative.
    """
    x = np.asarray(snr, dtype=np.float64)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise RateDomainError(f"snr must be finite and nonnegative, got {snr}")
    on_curve = x >= curve.tangent_point
    curve_part = 0.5 * np.log2(curve.offset + curve.gain * x)
    values = np.where(on_curve, np.maximum(curve_part, 0.0), curve.slope * x)
    return float(values) if values.ndim == 0 else values
