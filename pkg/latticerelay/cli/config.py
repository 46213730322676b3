"""Run configuration - Validated options and experiment manifests.

Flags arrive from argparse as raw values (None when not given). An optional
manifest file fills in flags that were not given on the command line, and
the merged values are validated by pydantic models.

Manifest format, one setting per line:

    # comment
    snr-db = 10
    g = 4
"""

import logging
import math
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from latticerelay.core.channel import ChannelParams

logger = logging.getLogger(__name__)

# Source power used when neither --p nor an SNR is given
DEFAULT_POWER = 10.0


class ConfigValidationError(Exception):
    """Raised when flags or a manifest file are invalid."""

    pass


def normalize_key(key: str) -> str:
    """Manifest keys match flag names: dashes and underscores are interchangeable."""
    return key.strip().lstrip("-").replace("-", "_").lower()


def load_manifest(path: str | Path, allowed: set[str] | dict[str, str]) -> dict[str, str]:
    """Read a ``key = value`` manifest.

    Args:
        path: Manifest file.
        allowed: Keys (argparse dests) the manifest may set, or a mapping
            from accepted key spellings to dests.

    Returns:
        Mapping of normalized key to raw string value.

    Raises:
        ConfigValidationError: On unreadable files, malformed lines or
            unknown keys.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigValidationError(f"Cannot read config file {path}: {e}") from e

    values: dict[str, str] = {}
    if isinstance(allowed, dict):
        lowered = {normalize_key(key): dest for key, dest in allowed.items()}
    else:
        lowered = {key.lower(): key for key in allowed}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if key not in lowered:
            raise ConfigValidationError(f"{path}:{lineno}: unknown key '{key}'")
        values[lowered[key]] = value.strip()
    logger.debug("Loaded %d settings from %s", len(values), path)
    return values


def merge_manifest(flags: dict[str, Any], manifest: dict[str, str]) -> dict[str, Any]:
    """Manifest values fill flags left unset (None or False); given flags win."""
    merged = dict(flags)
    for key, value in manifest.items():
        if merged.get(key) in (None, False):
            merged[key] = value
    return merged


class RunConfig(BaseModel):
    """Channel and output settings shared by every subcommand."""

    model_config = ConfigDict(extra="ignore")

    command: str
    P: float | None = Field(default=None, gt=0)
    P_R: float | None = Field(default=None, gt=0)
    g: float = Field(default=1.0, ge=0)
    N_R: float = Field(default=1.0, ge=0)
    N_1: float | None = Field(default=None, ge=0)
    N_2: float | None = Field(default=None, ge=0)
    snr: float | None = Field(default=None, gt=0)
    snr_db: float | None = None
    symmetric: bool = False
    out: Path | None = None
    seed: int = Field(default=0, ge=0, lt=2**64)
    debug: bool = False

    @model_validator(mode="after")
    def _resolve_powers(self) -> "RunConfig":
        if self.snr is not None and self.snr_db is not None:
            raise ValueError("give either snr or snr_db, not both")
        if self.snr_db is not None:
            if not math.isfinite(self.snr_db):
                raise ValueError(f"snr_db must be finite, got {self.snr_db}")
            try:
                self.snr = 10.0 ** (self.snr_db / 10.0)
            except OverflowError:
                raise ValueError(f"snr_db out of range, got {self.snr_db}") from None
            if self.snr <= 0.0:
                raise ValueError(f"snr_db out of range, got {self.snr_db}")
            self.snr_db = None
        if self.snr is not None:
            if self.P is not None:
                raise ValueError("give either p or an SNR, not both")
            if self.N_R <= 0:
                raise ValueError("an SNR needs a positive relay noise variance")
            self.P = self.snr * self.N_R
            if not math.isfinite(self.P):
                raise ValueError(f"SNR {self.snr} times noise {self.N_R} overflows")
        if self.P is None:
            self.P = DEFAULT_POWER

        if self.symmetric:
            for name, expected in (("P_R", self.P), ("N_1", self.N_R), ("N_2", self.N_R)):
                given = getattr(self, name)
                if given is not None and given != expected:
                    raise ValueError(f"--symmetric conflicts with {name}={given}")
        if self.P_R is None:
            self.P_R = self.P
        if self.N_1 is None:
            self.N_1 = self.N_R
        if self.N_2 is None:
            self.N_2 = self.N_R
        return self

    def channel(self) -> ChannelParams:
        """ChannelParams for the analysis subcommands (all variances positive)."""
        return ChannelParams(
            P=self.P, P_R=self.P_R, g=self.g, N_R=self.N_R, N_1=self.N_1, N_2=self.N_2
        )


class RatesOptions(RunConfig):
    """Options for ``rates``."""

    scheme: Literal[1, 2] = 1


class GapsOptions(RunConfig):
    """Options for ``gaps``."""

    g_values: list[float] = Field(default_factory=lambda: [1.0])

    @field_validator("g_values", mode="before")
    @classmethod
    def _split(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item for item in value.replace(",", " ").split() if item]
        return value

    @field_validator("g_values")
    @classmethod
    def _positive(cls, value: list[float]) -> list[float]:
        if not value:
            raise ValueError("at least one g is required")
        for g in value:
            if not g > 0:
                raise ValueError(f"g must be positive, got {g}")
        return value


class SweepOptions(RunConfig):
    """Options for ``sweep``: an SNR grid in dB."""

    snr_db_start: float = -10.0
    snr_db_stop: float = 40.0
    snr_db_step: float = Field(default=1.0, gt=0)
    schemes: list[Literal[1, 2]] = Field(default_factory=lambda: [1, 2])

    @field_validator("schemes", mode="before")
    @classmethod
    def _split(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [int(item) for item in value.replace(",", " ").split() if item]
        return value

    @model_validator(mode="after")
    def _non_empty(self) -> "SweepOptions":
        if self.snr_db_stop < self.snr_db_start:
            raise ValueError("empty SNR range: stop is below start")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        return self

    def snr_db_grid(self) -> list[float]:
        """Grid points start, start+step, ... up to stop inclusive."""
        count = int(math.floor((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9))
        return [self.snr_db_start + i * self.snr_db_step for i in range(count + 1)]


class UceOptions(RunConfig):
    """Options for ``uce``."""

    user: Literal[1, 2] = 1
    snr_max: float = Field(default=5.0, gt=0)
    points: int = Field(default=51, ge=2, le=100_000)


class SimulateOptions(RunConfig):
    """Options for ``simulate``."""

    scheme: Literal[1, 2] = 1
    dim: int = Field(default=4, ge=1, le=16)
    trials: int = Field(default=10_000, ge=1)
    rate_backoff: float = Field(default=1.0, ge=0)
    resolution: int | None = Field(default=None, ge=1)
    broadcast_size: int | None = Field(default=None, ge=1, le=4096)
    broadcast_len: int | None = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)
    trial_log: Path | None = None

    @property
    def end_to_end(self) -> bool:
        """Broadcast flags switch on the full exchange."""
        return self.broadcast_size is not None or self.broadcast_len is not None


class TablesOptions(RunConfig):
    """Options for ``tables``."""

    out_dir: Path = Path(".")
