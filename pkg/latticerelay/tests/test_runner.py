"""Tests for the Monte-Carlo drivers."""

import pytest

from latticerelay.sim.runner import (
    EndToEndConfig,
    MacSimConfig,
    run_end_to_end,
    run_end_to_end_trials,
    run_mac_experiment,
    run_mac_trials,
)
from latticerelay.sim.schemes import SchemeConfig, SchemeKind, SimulationConfigError


def mac_config(kind=SchemeKind.SCHEME1, g=1.0, k=4, n=2, P=10.0, N_R=1.0, trials=300, **kwargs):
    return MacSimConfig(scheme=SchemeConfig(kind, n, g, k), P=P, N_R=N_R, trials=trials, **kwargs)


class TestMacSimConfig:
    """Tests for MacSimConfig validation."""

    def test_alpha_mmse(self):
        """α defaults to the MMSE value."""
        assert mac_config().alpha == pytest.approx(20 / 21)

    def test_effective_noise(self):
        """Closed-form N_eq at g=1, P/N=10."""
        assert mac_config().effective_noise == pytest.approx(20 / 21)

    @pytest.mark.parametrize(
        "kwargs",
        [{"P": 0.0}, {"N_R": -1.0}, {"trials": 0}, {"seed": -1}, {"seed": 2**64}, {"workers": 0}],
    )
    def test_invalid(self, kwargs):
        """Invalid settings raise SimulationConfigError."""
        with pytest.raises(SimulationConfigError):
            mac_config(**kwargs)


class TestMacExperiment:
    """Tests for run_mac_trials and run_mac_experiment."""

    @pytest.mark.parametrize(
        "kind, g, k",
        [
            (SchemeKind.SCHEME1, 1.0, 4),
            (SchemeKind.SCHEME1, 4.0, 3),
            (SchemeKind.SCHEME2, 4.0, 2),
            (SchemeKind.SCHEME2, 0.25, 2),
        ],
    )
    def test_noiseless_is_exact(self, kind, g, k):
        """N_R = 0 gives zero errors."""
        result = run_mac_experiment(mac_config(kind, g, k, N_R=0.0, trials=200))
        assert result.errors == 0
        assert result.error_rate == 0.0

    def test_deterministic(self):
        """Same seed, same trials."""
        cfg = mac_config(N_R=2.0, seed=42)
        assert run_mac_trials(cfg) == run_mac_trials(cfg)

    def test_seed_changes_trials(self):
        """Different seeds draw different codewords."""
        a = run_mac_trials(mac_config(seed=1))
        b = run_mac_trials(mac_config(seed=2))
        assert [t.v1 for t in a] != [t.v1 for t in b]

    def test_workers_do_not_change_results(self):
        """Thread fan-out returns the same trials in the same order."""
        single = run_mac_trials(mac_config(N_R=2.0, trials=4500, seed=3))
        pooled = run_mac_trials(mac_config(N_R=2.0, trials=4500, seed=3, workers=3))
        assert single == pooled

    def test_trial_order(self):
        """Trials come back indexed 0..n-1."""
        trials = run_mac_trials(mac_config(trials=50))
        assert [t.index for t in trials] == list(range(50))

    def test_high_noise_errs(self):
        """A rate far above the threshold fails often."""
        result = run_mac_experiment(mac_config(k=7, P=1.0, N_R=1.0, trials=300))
        assert result.error_rate > 0.5

    def test_schemes_agree_at_unit_gain(self):
        """At g = 1 with a = 1 both schemes make the same decisions under one seed."""
        first = run_mac_trials(mac_config(SchemeKind.SCHEME1, 1.0, 3, N_R=1.0, trials=1000, seed=7))
        second = run_mac_trials(mac_config(SchemeKind.SCHEME2, 1.0, 3, N_R=1.0, trials=1000, seed=7))
        assert [(t.v1, t.v2, t.t, t.t_hat) for t in first] == [
            (t.v1, t.v2, t.t, t.t_hat) for t in second
        ]
        assert sum(t.error for t in first) > 0

    def test_error_rate_falls_with_snr(self):
        """Error rates do not rise across a 5-point SNR grid."""
        rates = [
            run_mac_experiment(mac_config(k=3, P=P, N_R=1.0, trials=5000, seed=11)).error_rate
            for P in (4.0, 8.0, 16.0, 32.0, 64.0)
        ]
        assert all(b <= a + 0.005 for a, b in zip(rates, rates[1:]))
        assert rates[0] > 0.1
        assert rates[-1] < 0.01

    @pytest.mark.slow
    def test_backoff_lowers_error_rate(self):
        """Scheme 1, g=4, P/N=100: a 1-bit back-off beats a 0.25-bit back-off."""
        one_bit = run_mac_experiment(
            mac_config(SchemeKind.SCHEME1, 4.0, 3, n=4, P=100.0, trials=100_000, seed=42, workers=4)
        )
        quarter_bit = run_mac_experiment(
            mac_config(SchemeKind.SCHEME1, 4.0, 7, n=4, P=100.0, trials=100_000, seed=42, workers=4)
        )
        assert one_bit.error_rate < quarter_bit.error_rate
        assert not one_bit.overlaps(quarter_bit)


class TestEndToEnd:
    """Tests for the full two-way exchange."""

    def test_noiseless_exchange(self):
        """Clean links everywhere: both nodes always recover."""
        mac = mac_config(SchemeKind.SCHEME2, 4.0, 2, N_R=0.0, trials=200)
        result = run_end_to_end(EndToEndConfig(mac=mac, P_R=10.0, N_1=0.0, N_2=0.0))
        assert result.joint.errors == 0
        assert result.node1.errors == 0
        assert result.node2.errors == 0

    def test_scheme1_noiseless_exchange(self):
        """Scheme 1 with a coprime coefficient recovers at both nodes."""
        mac = mac_config(SchemeKind.SCHEME1, 4.0, 3, N_R=0.0, trials=100)
        result = run_end_to_end(EndToEndConfig(mac=mac, P_R=10.0, N_1=0.0, N_2=0.0))
        assert result.joint.errors == 0

    def test_broadcast_noise_counts(self):
        """Noisy downlinks show up as broadcast and node errors."""
        mac = mac_config(SchemeKind.SCHEME1, 1.0, 4, N_R=0.0, trials=300)
        cfg = EndToEndConfig(
            mac=mac, P_R=1.0, N_1=5.0, N_2=5.0, broadcast_codebook_size=16, broadcast_blocklength=2
        )
        result = run_end_to_end(cfg)
        assert result.mac.errors == 0
        assert result.broadcast1.errors > 0
        assert result.node1.errors >= result.broadcast1.errors
        assert result.joint.errors >= max(result.node1.errors, result.node2.errors)

    def test_deterministic_with_workers(self):
        """End-to-end trials do not depend on the worker count."""
        mac = mac_config(N_R=1.0, trials=2500, seed=9)
        pooled = mac_config(N_R=1.0, trials=2500, seed=9, workers=2)
        cfg = dict(P_R=10.0, N_1=1.0, N_2=1.0, broadcast_blocklength=4)
        assert run_end_to_end_trials(EndToEndConfig(mac=mac, **cfg)) == run_end_to_end_trials(
            EndToEndConfig(mac=pooled, **cfg)
        )

    def test_codebook_too_small(self):
        """The broadcast codebook needs one row per value of T."""
        mac = mac_config(trials=10)
        with pytest.raises(SimulationConfigError, match="cannot carry"):
            run_end_to_end(EndToEndConfig(mac=mac, P_R=1.0, N_1=1.0, N_2=1.0, broadcast_codebook_size=4))

    def test_invalid_downlink(self):
        """Negative downlink noise raises."""
        with pytest.raises(SimulationConfigError):
            EndToEndConfig(mac=mac_config(), P_R=1.0, N_1=-1.0, N_2=1.0)
