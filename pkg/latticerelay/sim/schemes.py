"""Schemes - Lattice chains for the two relay coding schemes.

Every lattice here is uniform-scale. The coarse lattices are scaled so
their second moment equals the source power: Δ = √(12P).

Scheme 1 (compute-and-forward):
    Λ = ΔZⁿ shapes both nodes, the fine lattice is (Δ/k)Zⁿ, and the relay
    decodes T = [V₁ + aV₂] mod Λ.

Scheme 2 (partition chain, √g = p or 1/q):
    Λ₁ = Λ₂ = ΔZⁿ shape the nodes, Λ₃ = √g·Λ₂ and the common fine lattice
    Λ_C refines both. The relay decodes T = [V₁ + √g V₂] modulo the
    coarser of Λ₁ and Λ₃, with the finer lattice's wrap folded into T.
"""

import logging
import math
from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of enum.StrEnum for Python 3.10."""

        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

from latticerelay.core.codebook import MAX_CODEBOOK_SIZE, LatticeCodebook, build_codebook
from latticerelay.core.lattice import Lattice, LatticeError, NestedPair
from latticerelay.core.rates import nearest_integer_coefficient

logger = logging.getLogger(__name__)

# Relative tolerance when matching g to an integer or reciprocal-integer square
SQUARE_TOLERANCE = 1e-9


class SimulationConfigError(Exception):
    """Raised when a simulation configuration is invalid."""

    pass


class SchemeKind(StrEnum):
    """Relay coding scheme."""

    SCHEME1 = "scheme1"
    SCHEME2 = "scheme2"


def square_root_ratio(g: float) -> tuple[int, int]:
    """Write √g as p/q with p = 1 or q = 1.

    Raises:
        SimulationConfigError: If neither √g nor 1/√g is an integer.
    """
    if not g > 0:
        raise SimulationConfigError(f"scheme 2 needs g > 0, got {g}")
    root = math.sqrt(g)
    if root >= 1:
        p = round(root)
        if abs(p * p - g) <= SQUARE_TOLERANCE * g:
            return p, 1
    else:
        q = round(1 / root)
        if abs(1 / (q * q) - g) <= SQUARE_TOLERANCE * g:
            return 1, q
    raise SimulationConfigError(
        f"scheme 2 needs √g or 1/√g to be an integer, got g={g}"
    )


@dataclass(frozen=True)
class SchemeConfig:
    """Coding scheme for a MAC-phase simulation.

    Attributes:
        kind: Scheme 1 or scheme 2.
        dimension: Lattice dimension n (1..16).
        g: Channel power gain of node 2.
        resolution: Fine-lattice points per coarse cell edge. Scheme 1 uses
            (Δ/k)Zⁿ; scheme 2 uses Λ_C = (Δ/(q·k))Zⁿ.
        coefficient: Scheme-1 integer a, ⌈√g⌋ when None.
        alpha: Receiver scaling, MMSE when None.
    """

    kind: SchemeKind
    dimension: int
    g: float
    resolution: int
    coefficient: int | None = None
    alpha: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if not 1 <= self.dimension <= 16:
            raise SimulationConfigError(
                f"dimension must be in 1..16, got {self.dimension}"
            )
        if self.resolution < 1:
            raise SimulationConfigError(
                f"resolution must be positive, got {self.resolution}"
            )
        if not math.isfinite(self.g) or self.g < 0:
            raise SimulationConfigError(f"g must be nonnegative, got {self.g}")
        if self.kind is SchemeKind.SCHEME1:
            if self.coefficient is None:
                object.__setattr__(
                    self, "coefficient", nearest_integer_coefficient(self.g)
                )
            if self.coefficient < 1:
                raise SimulationConfigError(
                    f"coefficient must be positive, got {self.coefficient}"
                )
            if math.gcd(self.coefficient, self.resolution) != 1:
                raise SimulationConfigError(
                    f"coefficient {self.coefficient} and resolution "
                    f"{self.resolution} must be coprime for node 1 to recover V₂"
                )
        else:
            square_root_ratio(self.g)
            if self.coefficient is not None:
                raise SimulationConfigError("scheme 2 takes no integer coefficient")
        for size in self.codebook_sizes:
            if size > MAX_CODEBOOK_SIZE:
                raise SimulationConfigError(
                    f"codebook of {size} codewords exceeds limit {MAX_CODEBOOK_SIZE}"
                )

    @property
    def gain_factor(self) -> float:
        """Coefficient of V₂ in the relay's target: a or √g."""
        if self.kind is SchemeKind.SCHEME1:
            return float(self.coefficient)
        p, q = square_root_ratio(self.g)
        return p / q

    @property
    def codebook_sizes(self) -> tuple[int, int]:
        """(|C₁|, |C₂|)."""
        n, k = self.dimension, self.resolution
        if self.kind is SchemeKind.SCHEME1:
            return k**n, k**n
        p, q = square_root_ratio(self.g)
        return (q * k) ** n, (p * k) ** n

    @property
    def rates(self) -> tuple[float, float]:
        """Code rates (R₁, R₂) in bits per dimension."""
        n = self.dimension
        return tuple(math.log2(size) / n for size in self.codebook_sizes)


@dataclass(frozen=True, eq=False)
class LatticeChain:
    """All lattices and codebooks of one scheme at one power level.

    Attributes:
        config: Scheme the chain realizes.
        shaping1: Node 1's coarse (shaping) lattice.
        shaping2: Node 2's coarse lattice.
        decode: Fine lattice the relay quantizes onto.
        outer: Lattice the relay reduces modulo; T lives in decode/outer.
        inner: The finer of Λ₁ and Λ₃ (equal to outer for scheme 1).
        codebook1: C₁, node 1's codebook.
        codebook2: C₂, node 2's codebook.
        target_codebook: Cosets of decode modulo outer, the values of T.
    """

    config: SchemeConfig
    shaping1: Lattice
    shaping2: Lattice
    decode: Lattice
    outer: Lattice
    inner: Lattice
    codebook1: LatticeCodebook
    codebook2: LatticeCodebook
    target_codebook: LatticeCodebook
    power: float

    @property
    def gain_factor(self) -> float:
        return self.config.gain_factor

    @property
    def scale(self) -> float:
        """Δ, the edge of the shaping cells."""
        return self.shaping1.scale


def coarse_scale(power: float) -> float:
    """Δ with Δ²/12 = power."""
    return math.sqrt(12.0 * power)


def build_chain(config: SchemeConfig, power: float) -> LatticeChain:
    """Construct the lattice chain and codebooks of a scheme.

    Args:
        config: Scheme description.
        power: Source power P; both nodes' shaping lattices get σ² = P.

    Returns:
        LatticeChain.

    Raises:
        SimulationConfigError: If power is not positive or a nesting fails.
    """
    if not power > 0:
        raise SimulationConfigError(f"power must be positive, got {power}")
    n, k = config.dimension, config.resolution
    delta = coarse_scale(power)
    shaping = Lattice.uniform(n, delta)

    try:
        if config.kind is SchemeKind.SCHEME1:
            fine = Lattice.uniform(n, delta / k)
            codebook = build_codebook(NestedPair(shaping, fine))
            chain = LatticeChain(
                config=config,
                shaping1=shaping,
                shaping2=shaping,
                decode=fine,
                outer=shaping,
                inner=shaping,
                codebook1=codebook,
                codebook2=codebook,
                target_codebook=codebook,
                power=power,
            )
        else:
            p, q = square_root_ratio(config.g)
            scaled = Lattice.uniform(n, delta * p / q)
            common = Lattice.uniform(n, delta / (q * k))
            outer, inner = (scaled, shaping) if p > 1 else (shaping, scaled)
            chain = LatticeChain(
                config=config,
                shaping1=shaping,
                shaping2=shaping,
                decode=common,
                outer=outer,
                inner=inner,
                codebook1=build_codebook(NestedPair(shaping, common)),
                codebook2=build_codebook(
                    NestedPair(shaping, Lattice.uniform(n, delta / (p * k)))
                ),
                target_codebook=build_codebook(NestedPair(outer, common)),
                power=power,
            )
    except LatticeError as e:
        raise SimulationConfigError(f"cannot build lattice chain: {e}") from e

    logger.debug(
        "%s chain: Δ=%.6g, |C1|=%d, |C2|=%d, |T|=%d",
        config.kind,
        delta,
        len(chain.codebook1),
        len(chain.codebook2),
        len(chain.target_codebook),
    )
    return chain
