"""Runner - Monte-Carlo drivers for the MAC phase and the full exchange.

Every trial draws from its own generator keyed by (seed, trial index), so
results do not depend on how trials are split across worker threads.
"""

import logging
import math
from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from latticerelay.core.lattice import draw_voronoi_uniform
from latticerelay.core.rates import effective_noise, mmse_coefficient
from latticerelay.sim.broadcast import MAX_BROADCAST_SIZE, RelayCodebook, broadcast_phase
from latticerelay.sim.mac import (
    RecoveryError,
    encode_node,
    lattice_wrap,
    mac_channel,
    node1_recover,
    node2_recover,
    relay_decode,
    target_t,
)
from latticerelay.sim.schemes import (
    LatticeChain,
    SchemeConfig,
    SimulationConfigError,
    build_chain,
)
from latticerelay.sim.stats import SimResult

logger = logging.getLogger(__name__)

# Trials handled per worker task
CHUNK_SIZE = 2000

# spawn_key prefixes separating trial streams from codebook streams
_TRIAL_STREAM = 0
_BROADCAST_STREAM = 1


@dataclass(frozen=True)
class MacSimConfig:
    """MAC-phase experiment.

    Attributes:
        scheme: Coding scheme and lattice dimensions.
        P: Source power (both nodes).
        N_R: Relay noise variance, 0 for a noiseless uplink.
        trials: Number of independent trials.
        seed: Master seed (unsigned 64-bit).
        workers: Worker threads; results are identical for any value.
    """

    scheme: SchemeConfig
    P: float
    N_R: float
    trials: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if not math.isfinite(self.P) or self.P <= 0:
            raise SimulationConfigError(f"P must be positive, got {self.P}")
        if not math.isfinite(self.N_R) or self.N_R < 0:
            raise SimulationConfigError(f"N_R must be nonnegative, got {self.N_R}")
        if self.trials < 1:
            raise SimulationConfigError(f"trials must be positive, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise SimulationConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.workers < 1:
            raise SimulationConfigError(f"workers must be positive, got {self.workers}")

    @property
    def alpha(self) -> float:
        """Receiver scaling: the scheme's fixed α or the MMSE value."""
        if self.scheme.alpha is not None:
            return self.scheme.alpha
        return mmse_coefficient(self.P, self.scheme.g, self.N_R, self.scheme.gain_factor)

    @property
    def effective_noise(self) -> float:
        """Closed-form variance per dimension of the relay's effective noise."""
        return effective_noise(
            self.P, self.scheme.g, self.N_R, self.scheme.gain_factor, self.alpha
        )


@dataclass(frozen=True)
class EndToEndConfig:
    """MAC phase followed by the relay broadcast.

    Attributes:
        mac: Uplink experiment.
        P_R: Relay power.
        N_1: Noise variance at node 1.
        N_2: Noise variance at node 2.
        broadcast_codebook_size: Rows of the relay codebook, at least the
            number of values T can take and at most 4096. Defaults to that
            number.
        broadcast_blocklength: Channel uses per broadcast codeword.
    """

    mac: MacSimConfig
    P_R: float
    N_1: float
    N_2: float
    broadcast_codebook_size: int | None = None
    broadcast_blocklength: int = 16

    def __post_init__(self) -> None:
        if not math.isfinite(self.P_R) or self.P_R <= 0:
            raise SimulationConfigError(f"P_R must be positive, got {self.P_R}")
        for name in ("N_1", "N_2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise SimulationConfigError(f"{name} must be nonnegative, got {value}")
        if self.broadcast_blocklength < 1:
            raise SimulationConfigError(
                f"broadcast blocklength must be positive, got {self.broadcast_blocklength}"
            )
        size = self.broadcast_codebook_size
        if size is not None and not 1 <= size <= MAX_BROADCAST_SIZE:
            raise SimulationConfigError(
                f"broadcast codebook size must be in 1..{MAX_BROADCAST_SIZE}, got {size}"
            )


@dataclass(frozen=True)
class MacTrial:
    """One uplink trial, by codeword index."""

    index: int
    v1: int
    v2: int
    t: int
    t_hat: int
    t_hat_inner: int

    @property
    def error(self) -> bool:
        return self.t != self.t_hat


@dataclass(frozen=True)
class ExchangeTrial:
    """One full exchange: uplink, both broadcasts and both recoveries."""

    mac: MacTrial
    bc1_index: int
    bc2_index: int
    v1_hat: int | None
    v2_hat: int | None

    @property
    def bc1_error(self) -> bool:
        return self.bc1_index != self.mac.t_hat

    @property
    def bc2_error(self) -> bool:
        return self.bc2_index != self.mac.t_hat

    @property
    def node1_error(self) -> bool:
        """Node 1 failed to recover W₂."""
        return self.v2_hat != self.mac.v2

    @property
    def node2_error(self) -> bool:
        """Node 2 failed to recover W₁."""
        return self.v1_hat != self.mac.v1


@dataclass(frozen=True)
class EndToEndResult:
    """Error statistics per phase and per node."""

    mac: SimResult
    broadcast1: SimResult
    broadcast2: SimResult
    node1: SimResult
    node2: SimResult
    joint: SimResult


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based generator for one trial."""
    sequence = np.random.SeedSequence(seed, spawn_key=(_TRIAL_STREAM, trial))
    return np.random.Generator(np.random.Philox(sequence))


@dataclass(frozen=True)
class _Uplink:
    trial: MacTrial
    v1: np.ndarray
    v2: np.ndarray
    wrap1: np.ndarray
    wrap2: np.ndarray
    t_hat: np.ndarray


def _run_uplink(
    chain: LatticeChain,
    cfg: MacSimConfig,
    alpha: float,
    index: int,
    rng: np.random.Generator,
) -> _Uplink:
    c1, c2 = chain.codebook1, chain.codebook2
    i1 = int(rng.integers(len(c1)))
    i2 = int(rng.integers(len(c2)))
    v1, v2 = c1.codeword(i1), c2.codeword(i2)
    d1 = draw_voronoi_uniform(chain.shaping1, rng)
    d2 = draw_voronoi_uniform(chain.shaping2, rng)

    x1 = encode_node(v1, d1, chain.shaping1)
    x2 = encode_node(v2, d2, chain.shaping2)
    wrap1 = lattice_wrap(v1, d1, chain.shaping1)
    wrap2 = lattice_wrap(v2, d2, chain.shaping2)
    y = mac_channel(x1, x2, cfg.scheme.g, cfg.N_R, rng)
    estimate = relay_decode(y, d1, d2, chain, alpha)

    target = chain.target_codebook
    trial = MacTrial(
        index=index,
        v1=i1,
        v2=i2,
        t=target.index_of(target_t(v1, v2, chain, wrap1, wrap2)),
        t_hat=target.index_of(estimate.t_hat),
        t_hat_inner=target.index_of(estimate.t_hat_inner),
    )
    return _Uplink(trial, v1, v2, wrap1, wrap2, estimate.t_hat)


def _chunks(trials: int) -> Iterator[range]:
    for start in range(0, trials, CHUNK_SIZE):
        yield range(start, min(trials, start + CHUNK_SIZE))


def _fan_out(workers: int, task: Callable[[range], list], trials: int) -> list:
    """Run task over trial chunks and concatenate results in trial order."""
    chunks = list(_chunks(trials))
    if workers == 1 or len(chunks) == 1:
        results = [task(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(task, chunks))
    return [item for chunk in results for item in chunk]


def run_mac_trials(cfg: MacSimConfig) -> list[MacTrial]:
    """Run every uplink trial and return them in trial order."""
    chain = build_chain(cfg.scheme, cfg.P)
    alpha = cfg.alpha

    def task(chunk: range) -> list[MacTrial]:
        out = []
        for i in chunk:
            out.append(_run_uplink(chain, cfg, alpha, i, trial_rng(cfg.seed, i)).trial)
        logger.debug("MAC trials %d..%d done", chunk.start, chunk.stop - 1)
        return out

    return _fan_out(cfg.workers, task, cfg.trials)


def run_mac_experiment(cfg: MacSimConfig) -> SimResult:
    """Empirical probability that the relay's estimate of T is wrong.

    Args:
        cfg: Experiment configuration.

    Returns:
        SimResult over cfg.trials trials; deterministic in cfg.seed.

    Raises:
        SimulationConfigError: If the scheme cannot be realized.
    """
    trials = run_mac_trials(cfg)
    result = SimResult.from_counts(sum(t.error for t in trials), cfg.trials)
    logger.info(
        "MAC %s g=%g n=%d: %d/%d errors",
        cfg.scheme.kind,
        cfg.scheme.g,
        cfg.scheme.dimension,
        result.errors,
        result.trials,
    )
    return result


def broadcast_codebook(cfg: EndToEndConfig, chain: LatticeChain) -> RelayCodebook:
    """Seeded relay codebook with one row per value of T at least."""
    needed = len(chain.target_codebook)
    size = cfg.broadcast_codebook_size or needed
    if size < needed:
        raise SimulationConfigError(
            f"broadcast codebook of {size} rows cannot carry {needed} values of T"
        )
    seed = np.random.SeedSequence(cfg.mac.seed, spawn_key=(_BROADCAST_STREAM,))
    return RelayCodebook.generate(size, cfg.broadcast_blocklength, cfg.P_R, seed)


def _recover(recover: Callable, codebook, t_hat, own, chain, wrap) -> int | None:
    try:
        return codebook.index_of(recover(t_hat, own, chain, wrap))
    except RecoveryError as e:
        logger.debug("Recovery failed: %s", e)
        return None


def run_end_to_end_trials(cfg: EndToEndConfig) -> list[ExchangeTrial]:
    """Run every exchange trial and return them in trial order."""
    mac = cfg.mac
    chain = build_chain(mac.scheme, mac.P)
    relay_book = broadcast_codebook(cfg, chain)
    targets = chain.target_codebook
    alpha = mac.alpha

    def task(chunk: range) -> list[ExchangeTrial]:
        out = []
        for i in chunk:
            rng = trial_rng(mac.seed, i)
            up = _run_uplink(chain, mac, alpha, i, rng)
            bc1 = broadcast_phase(up.trial.t_hat, relay_book, cfg.N_1, rng)
            bc2 = broadcast_phase(up.trial.t_hat, relay_book, cfg.N_2, rng)
            v2_hat = v1_hat = None
            if bc1 < len(targets):
                v2_hat = _recover(
                    node1_recover, chain.codebook2, targets.codeword(bc1), up.v1,
                    chain, up.wrap1,
                )
            if bc2 < len(targets):
                v1_hat = _recover(
                    node2_recover, chain.codebook1, targets.codeword(bc2), up.v2,
                    chain, up.wrap2,
                )
            out.append(ExchangeTrial(up.trial, bc1, bc2, v1_hat, v2_hat))
        return out

    return _fan_out(mac.workers, task, mac.trials)


def run_end_to_end(cfg: EndToEndConfig) -> EndToEndResult:
    """Per-phase and per-node error rates of the full two-way exchange.

    The joint error counts trials where either node got the wrong message.
    """
    trials = run_end_to_end_trials(cfg)
    n = len(trials)

    def count(predicate: Callable[[ExchangeTrial], bool]) -> SimResult:
        return SimResult.from_counts(sum(1 for t in trials if predicate(t)), n)

    result = EndToEndResult(
        mac=count(lambda t: t.mac.error),
        broadcast1=count(lambda t: t.bc1_error),
        broadcast2=count(lambda t: t.bc2_error),
        node1=count(lambda t: t.node1_error),
        node2=count(lambda t: t.node2_error),
        joint=count(lambda t: t.node1_error or t.node2_error),
    )
    logger.info(
        "End-to-end %s: mac %d, node1 %d, node2 %d, joint %d errors of %d",
        cfg.mac.scheme.kind,
        result.mac.errors,
        result.node1.errors,
        result.node2.errors,
        result.joint.errors,
        n,
    )
    return result

