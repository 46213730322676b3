"""Tests for scheme configuration and lattice chains."""

import math

import numpy as np
import pytest

from latticerelay.core.rates import nested_rate_offset
from latticerelay.sim.schemes import (
    SchemeConfig,
    SchemeKind,
    SimulationConfigError,
    build_chain,
    coarse_scale,
    square_root_ratio,
)


class TestSquareRootRatio:
    """Tests for square_root_ratio."""

    @pytest.mark.parametrize(
        "g, ratio", [(1.0, (1, 1)), (4.0, (2, 1)), (9.0, (3, 1)), (0.25, (1, 2)), (1 / 9, (1, 3))]
    )
    def test_valid(self, g, ratio):
        """Integer and reciprocal-integer square roots."""
        assert square_root_ratio(g) == ratio

    @pytest.mark.parametrize("g", [2.0, 2.25, 0.5, 0.0])
    def test_invalid(self, g):
        """Other gains cannot build a scheme-2 chain."""
        with pytest.raises(SimulationConfigError):
            square_root_ratio(g)


class TestSchemeConfig:
    """Tests for SchemeConfig validation and derived sizes."""

    def test_scheme1_defaults(self):
        """Coefficient defaults to ⌈√g⌋."""
        cfg = SchemeConfig(SchemeKind.SCHEME1, dimension=2, g=4.0, resolution=3)
        assert cfg.coefficient == 2
        assert cfg.gain_factor == 2.0
        assert cfg.codebook_sizes == (9, 9)
        assert cfg.rates == pytest.approx((math.log2(3), math.log2(3)))

    def test_scheme1_coprime(self):
        """a and k must be coprime."""
        with pytest.raises(SimulationConfigError, match="coprime"):
            SchemeConfig(SchemeKind.SCHEME1, dimension=2, g=4.0, resolution=4)

    def test_scheme2_sizes(self):
        """|C₂|/|C₁| = gⁿ/² so the rates differ by ½log₂g."""
        cfg = SchemeConfig(SchemeKind.SCHEME2, dimension=2, g=4.0, resolution=3)
        assert cfg.codebook_sizes == (9, 36)
        r1, r2 = cfg.rates
        assert r2 - r1 == pytest.approx(nested_rate_offset(1.0, 4.0))

    def test_scheme2_small_gain(self):
        """g = 1/4 gives node 1 the larger codebook."""
        cfg = SchemeConfig(SchemeKind.SCHEME2, dimension=1, g=0.25, resolution=2)
        assert cfg.codebook_sizes == (4, 2)
        assert cfg.gain_factor == 0.5

    def test_scheme2_irrational_root(self):
        """g = 9/4 is rejected."""
        with pytest.raises(SimulationConfigError):
            SchemeConfig(SchemeKind.SCHEME2, dimension=2, g=2.25, resolution=2)

    def test_scheme2_no_coefficient(self):
        """Scheme 2 takes no integer coefficient."""
        with pytest.raises(SimulationConfigError):
            SchemeConfig(SchemeKind.SCHEME2, dimension=2, g=1.0, resolution=2, coefficient=1)

    def test_dimension_bounds(self):
        """Dimension must be 1..16."""
        with pytest.raises(SimulationConfigError, match="dimension"):
            SchemeConfig(SchemeKind.SCHEME1, dimension=17, g=1.0, resolution=2)

    def test_codebook_limit(self):
        """Codebooks beyond 2²⁰ codewords are rejected."""
        with pytest.raises(SimulationConfigError, match="exceeds"):
            SchemeConfig(SchemeKind.SCHEME1, dimension=8, g=1.0, resolution=7)

    def test_kind_from_string(self):
        """String kinds are accepted."""
        cfg = SchemeConfig("scheme2", dimension=1, g=1.0, resolution=2)
        assert cfg.kind is SchemeKind.SCHEME2


class TestBuildChain:
    """Tests for build_chain."""

    def test_coarse_scale_power(self):
        """Δ²/12 equals the power."""
        assert coarse_scale(10.0) ** 2 / 12 == pytest.approx(10.0)

    def test_scheme1_chain(self):
        """Scheme 1 shares one codebook for both nodes and T."""
        chain = build_chain(SchemeConfig(SchemeKind.SCHEME1, 2, 1.0, 4), power=3.0)
        assert chain.scale == pytest.approx(6.0)
        assert chain.decode.scale == pytest.approx(1.5)
        assert len(chain.codebook1) == len(chain.target_codebook) == 16

    def test_scheme2_chain_g4(self):
        """g = 4: the scaled lattice is outer and T has |C₂| values."""
        chain = build_chain(SchemeConfig(SchemeKind.SCHEME2, 2, 4.0, 2), power=3.0)
        assert chain.outer.scale == pytest.approx(12.0)
        assert chain.inner.scale == pytest.approx(6.0)
        assert chain.decode.scale == pytest.approx(3.0)
        assert len(chain.codebook1) == 4
        assert len(chain.codebook2) == 16
        assert len(chain.target_codebook) == 16

    def test_scheme2_chain_quarter(self):
        """g = 1/4: the shaping lattice is outer."""
        chain = build_chain(SchemeConfig(SchemeKind.SCHEME2, 1, 0.25, 2), power=3.0)
        assert chain.outer.scale == pytest.approx(6.0)
        assert chain.inner.scale == pytest.approx(3.0)
        assert chain.decode.scale == pytest.approx(1.5)

    def test_codewords_have_power_scale(self):
        """Codewords fit inside the shaping cell."""
        chain = build_chain(SchemeConfig(SchemeKind.SCHEME1, 2, 1.0, 5), power=1.0)
        assert np.all(np.abs(chain.codebook1.codewords) <= chain.scale / 2 + 1e-12)

    def test_nonpositive_power(self):
        """Power must be positive."""
        with pytest.raises(SimulationConfigError):
            build_chain(SchemeConfig(SchemeKind.SCHEME1, 1, 1.0, 2), power=0.0)
