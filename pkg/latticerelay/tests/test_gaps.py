"""Tests for the gap between the cut-set bound and the scheme-2 region."""

import numpy as np
import pytest

from latticerelay.core.channel import ChannelParams, RateDomainError
from latticerelay.core.envelope import uce_rate
from latticerelay.core.gaps import (
    gap_r1,
    gap_r2_high,
    gap_r2_low,
    gap_report,
    gap_sum,
    scheme2_gap,
)
from latticerelay.core.rates import r1_curve

# Published tables: (g, gap) pairs, matched to ±0.0005 bits
R1_HIGH_TABLE = [(1.0, 0.167), (100.0, 0.2637), (1e6, 0.2654)]

# g ≥ 1 rows where the published values do not follow from the R₁ gap formula
R1_HIGH_COMPUTED = [
    (4.0, 0.229903), (9.0, 0.2481), (16.0, 0.255346), (25.0, 0.2589), (64.0, 0.2628),
]
R1_LOW_TABLE = [(0.7, 0.146), (0.5, 0.1252), (0.3, 0.09497), (0.1, 0.045)]
R2_LOW_TABLE = [
    (0.7, 0.1872), (0.6, 0.195), (0.5, 0.2038), (0.3, 0.224),
    (0.1, 0.2498), (0.001, 0.2651), (0.0001, 0.2658),
]

# Dense SNR grid for the brute-force supremum
DENSE_SNR = np.geomspace(1e-6, 1e6, 400_001)


def dense_gap_r1(g: float) -> float:
    """Largest ½log₂(1+x) − uce₁(x) over DENSE_SNR."""
    return float(np.max(0.5 * np.log2(1.0 + DENSE_SNR) - uce_rate(r1_curve(g), DENSE_SNR)))


# ----------------------------------------------------------------------
# Table reproduction
# ----------------------------------------------------------------------


class TestGapR1:
    """Tests for gap_r1."""

    @pytest.mark.parametrize("g, expected", R1_HIGH_TABLE)
    def test_high_gain_table(self, g, expected):
        """g ≥ 1 values match the published table."""
        assert gap_r1(g) == pytest.approx(expected, abs=5e-4)

    @pytest.mark.parametrize("g, expected", R1_HIGH_COMPUTED)
    def test_high_gain_computed(self, g, expected):
        """Rows off the published table follow the closed form."""
        assert gap_r1(g) == pytest.approx(expected, abs=1e-4)

    @pytest.mark.parametrize("g", [0.1, 1.0, 4.0, 9.0, 16.0, 25.0, 64.0, 100.0])
    def test_matches_dense_supremum(self, g):
        """The closed form equals the supremum found on a dense SNR grid."""
        dense = dense_gap_r1(g)
        assert gap_r1(g) == pytest.approx(dense, abs=1e-8)
        assert gap_r1(g) >= dense - 1e-12

    @pytest.mark.parametrize("g, expected", R1_LOW_TABLE)
    def test_low_gain_table(self, g, expected):
        """g < 1 values match the published table."""
        assert gap_r1(g) == pytest.approx(expected, abs=5e-4)

    def test_g_0001(self):
        """g = 0.001 gives 0.000686 within 2%."""
        assert gap_r1(0.001) == pytest.approx(0.000686, rel=0.02)

    def test_g_00001(self):
        """g = 0.0001 gives ≈ 7.11e-5 (the printed 0.0001611 does not follow from the formula)."""
        assert gap_r1(0.0001) == pytest.approx(7.112e-5, rel=0.02)

    def test_g1_exact(self):
        """g = 1 gives 0.16732."""
        assert gap_r1(1.0) == pytest.approx(0.16732, abs=1e-5)

    def test_monotone_in_g(self):
        """The R₁ gap grows with g."""
        values = [gap_r1(g) for g in np.geomspace(1e-3, 1e4, 40)]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))

    def test_domain(self):
        """g ≤ 0 raises."""
        with pytest.raises(RateDomainError):
            gap_r1(0.0)


class TestGapR2:
    """Tests for gap_r2_low and gap_r2_high."""

    @pytest.mark.parametrize("g, expected", R2_LOW_TABLE)
    def test_low_gain_table(self, g, expected):
        """0 < g < 1 values match the published table."""
        assert gap_r2_low(g) == pytest.approx(expected, abs=5e-4)

    def test_low_gain_limit(self):
        """The R₂ gap approaches ≈ 0.2654 as g → 0."""
        assert gap_r2_low(1e-6) == pytest.approx(0.265369, abs=1e-5)

    def test_low_domain(self):
        """g outside (0, 1) raises."""
        with pytest.raises(RateDomainError):
            gap_r2_low(1.0)
        with pytest.raises(RateDomainError):
            gap_r2_low(0.0)

    def test_high_at_one(self):
        """g = 1 matches the R₁ gap, 0.16732."""
        assert gap_r2_high(1.0) == pytest.approx(0.16732, abs=1e-4)
        assert gap_r2_high(1.0) <= 0.167 + 5e-4

    def test_high_decreases(self):
        """The R₂ gap shrinks as g grows past 1."""
        assert gap_r2_high(1.5) == pytest.approx(0.029, abs=5e-3)
        assert gap_r2_high(1.5) < gap_r2_high(1.0)

    @pytest.mark.parametrize("g", [2.0, 4.0, 100.0])
    def test_high_zero_branch(self, g):
        """For g ≳ 1.9 the envelope never dips below the bound."""
        assert gap_r2_high(g) == 0.0
        assert gap_report(g).r2_branch_active

    def test_high_domain(self):
        """g < 1 raises."""
        with pytest.raises(RateDomainError):
            gap_r2_high(0.5)


# ----------------------------------------------------------------------
# Reports and sum gap
# ----------------------------------------------------------------------


class TestGapReport:
    """Tests for gap_report and gap_sum."""

    def test_regimes(self):
        """Regime labels follow g."""
        assert gap_report(0.5).regime == "g<1"
        assert gap_report(1.0).regime == "g=1"
        assert gap_report(4.0).regime == "g>1"

    def test_sum_is_total(self):
        """gap_sum adds the per-user gaps."""
        report = gap_report(0.3)
        assert report.gap_sum == pytest.approx(report.gap_r1 + report.gap_r2)
        assert gap_sum(0.3) == report.gap_sum

    def test_sum_at_one(self):
        """The sum gap at g = 1 is ≈ 0.3346."""
        assert gap_sum(1.0) == pytest.approx(0.3346, abs=5e-4)

    def test_sum_bounded(self):
        """The sum gap never exceeds 0.335 bits."""
        for g in np.geomspace(1e-4, 1e4, 61):
            assert gap_sum(float(g)) <= 0.335

    def test_per_user_bounded(self):
        """Each user's gap stays below ≈ 0.2654 bits."""
        for g in np.geomspace(1e-4, 1e6, 41):
            report = gap_report(float(g))
            assert report.gap_r1 <= 0.2655
            assert report.gap_r2 <= 0.2655

    def test_domain(self):
        """g ≤ 0 raises."""
        with pytest.raises(RateDomainError):
            gap_report(-1.0)


class TestScheme2Gap:
    """Tests for scheme2_gap at concrete channels."""

    @pytest.mark.parametrize("g", [0.01, 0.3, 1.0, 4.0])
    def test_symmetric_within_bound(self, g):
        """Pointwise gaps never exceed the supremum bounds."""
        report = gap_report(g)
        for snr in np.geomspace(1e-3, 1e5, 60):
            d1, d2 = scheme2_gap(ChannelParams.symmetric_model(float(snr), g))
            assert d1 <= report.gap_r1 + 1e-9
            assert d2 <= report.gap_r2 + 1e-9

    def test_gap_shrinks_at_high_snr(self):
        """At g = 10 the R₁ gap decreases with SNR."""
        gaps = [
            scheme2_gap(ChannelParams.symmetric_model(10 ** (db / 10), 10.0))[0]
            for db in range(10, 41, 5)
        ]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    def test_asymmetric_counterexample(self):
        """With a strong relay, g > 1 can leave an R₂ gap the symmetric model does not show."""
        p = ChannelParams(P=0.01, P_R=1e6, g=100.0, N_R=1.0, N_1=1.0, N_2=1.0)
        _, d2 = scheme2_gap(p)
        assert gap_r2_high(100.0) == 0.0
        assert d2 > 0.0

    def test_asymmetric_per_user_bounded(self):
        """Asymmetric channels stay within the largest per-user gap."""
        rng = np.random.default_rng(11)
        for _ in range(200):
            g = float(10 ** rng.uniform(-3, 3))
            p = ChannelParams(
                P=float(10 ** rng.uniform(-2, 4)),
                P_R=float(10 ** rng.uniform(-2, 6)),
                g=g,
                N_R=1.0,
                N_1=float(10 ** rng.uniform(-1, 1)),
                N_2=float(10 ** rng.uniform(-1, 1)),
            )
            d1, d2 = scheme2_gap(p)
            assert d1 <= 0.2658 + 1e-3
            assert d2 <= 0.2658 + 1e-3
