"""Stats - Error counts with Wilson confidence intervals, chi-square checks."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import stats

# Two-sided confidence level of reported intervals
CONFIDENCE_LEVEL = 0.95


@dataclass(frozen=True)
class SimResult:
    """Outcome of a batch of independent trials."""

    trials: int
    errors: int
    error_rate: float
    wilson_ci_95: tuple[float, float]

    @classmethod
    def from_counts(cls, errors: int, trials: int) -> "SimResult":
        """Build a result with its Wilson score interval.

        Raises:
            ValueError: If trials < 1 or errors is outside 0..trials.
        """
        if trials < 1:
            raise ValueError(f"trials must be positive, got {trials}")
        if not 0 <= errors <= trials:
            raise ValueError(f"errors must be in 0..{trials}, got {errors}")
        rate = errors / trials
        interval = stats.binomtest(errors, trials).proportion_ci(
            confidence_level=CONFIDENCE_LEVEL, method="wilson"
        )
        low = min(max(0.0, float(interval.low)), rate)
        high = max(min(1.0, float(interval.high)), rate)
        return cls(trials, errors, rate, (low, high))

    def overlaps(self, other: "SimResult") -> bool:
        """Whether the two confidence intervals intersect."""
        return (
            self.wilson_ci_95[0] <= other.wilson_ci_95[1]
            and other.wilson_ci_95[0] <= self.wilson_ci_95[1]
        )


def uniformity_pvalue(
    samples: ArrayLike, low: float, high: float, bins: int = 16
) -> float:
    """Chi-square p-value that 1-D samples are uniform on [low, high]."""
    counts, _ = np.histogram(np.asarray(samples).ravel(), bins=bins, range=(low, high))
    return float(stats.chisquare(counts).pvalue)


def same_distribution_pvalue(
    first: ArrayLike, second: ArrayLike, low: float, high: float, bins: int = 16
) -> float:
    """Two-sample chi-square p-value on a shared histogram."""
    table = [
        np.histogram(np.asarray(s).ravel(), bins=bins, range=(low, high))[0]
        for s in (first, second)
    ]
    return float(stats.chi2_contingency(np.asarray(table)).pvalue)


def independence_pvalue(
    labels: ArrayLike, samples: ArrayLike, low: float, high: float, bins: int = 16
) -> float:
    """Chi-square p-value that samples are independent of integer labels."""
    labels = np.asarray(labels).ravel()
    samples = np.asarray(samples).ravel()
    edges = np.linspace(low, high, bins + 1)
    cells = np.clip(np.digitize(samples, edges[1:-1]), 0, bins - 1)
    values = np.unique(labels)
    table = np.zeros((len(values), bins), dtype=np.int64)
    np.add.at(table, (np.searchsorted(values, labels), cells), 1)
    return float(stats.chi2_contingency(table).pvalue)
