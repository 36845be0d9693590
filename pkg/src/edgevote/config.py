"""Configuration: environment settings and JSON experiment documents."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic_settings.sources import DotEnvSettingsSource

from .constants import DEFAULT_MC_TRIALS, MAX_WORKERS_DEFAULT
from .errors import InputError, ParameterDomainError

logger = logging.getLogger(__name__)

CONFIG_DIR = Path.home() / ".edgevote"


# =============================================================================
# Exact rationals
# =============================================================================

def parse_rational(value: Any) -> Fraction:
    """Convert a config value to an exact Fraction.

    Accepts Fractions, ints, strings such as ``"1/20"`` or ``"0.05"`` and
    floats. Floats go through their shortest repr, so ``0.2`` becomes
    exactly 1/5 instead of the binary approximation.

    Raises:
        ParameterDomainError: If the value cannot be read as a rational.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParameterDomainError(f"Not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ParameterDomainError(f"Not a rational number: {value!r}") from e
    raise ParameterDomainError(f"Not a rational number: {value!r}")


def format_rational(value: Fraction) -> str:
    """Render a Fraction as ``num/den`` (or ``num`` for integers)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


Rational = Annotated[
    Fraction,
    BeforeValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str),
]


# =============================================================================
# Output files
# =============================================================================

def _resolve_output(path: str | Path) -> Path:
    """Resolve a relative output path against EDGEVOTE_OUTPUT_DIR."""
    path = Path(path).expanduser()
    if not path.is_absolute():
        path = Path(get_settings().output_dir).expanduser() / path
    return path


def write_output(path: str | Path, content: str | bytes) -> Path:
    """Write a result file, creating parent directories.

    Refuses to write through a symlink so a planted link cannot redirect
    results elsewhere.

    Returns:
        The resolved path that was written.

    Raises:
        InputError: If the target is a symlink.
    """
    target = _resolve_output(path)
    if target.is_symlink():
        raise InputError(f"Refusing to write through symlink: {target}")

    target.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(content, bytes):
        target.write_bytes(content)
    else:
        target.write_text(content, encoding="utf-8")
    logger.info("Wrote %s", target)
    return target


def load_json(path: str | Path) -> Any:
    """Read a JSON document.

    Raises:
        InputError: If the file is missing or not valid JSON.
    """
    try:
        return json.loads(Path(path).expanduser().read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"Invalid JSON in {path}: {e}") from e


# =============================================================================
# Environment settings
# =============================================================================

def _get_active_env_file() -> Path:
    """Get the active .env file using local-first priority.

    If ./.env exists in current directory, use it exclusively.
    Otherwise fall back to ~/.edgevote/.env for global config.
    """
    local_env = Path(".env")
    if local_env.exists():
        return local_env
    return CONFIG_DIR / ".env"


def _default_threads() -> int:
    return max(1, min(os.cpu_count() or 1, MAX_WORKERS_DEFAULT))


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        """Use local .env if exists, otherwise global ~/.edgevote/.env."""
        env_file = _get_active_env_file()
        dotenv_settings = DotEnvSettingsSource(
            settings_cls,
            env_file=env_file,
            env_file_encoding="utf-8",
        )
        return (init_settings, env_settings, dotenv_settings, file_secret_settings)

    # Worker pool cap for replicates, grid points and Monte Carlo blocks
    threads: int = Field(default_factory=_default_threads, ge=1, le=256, alias="EDGEVOTE_THREADS")

    # Execution mode for fan-out: "auto", "parallel", "sequential"
    # - auto (default): sequential when threads == 1, parallel otherwise
    # - parallel: always fan out through the worker pool
    # - sequential: run tasks one at a time in submission order
    execution_mode: str = Field(default="auto", alias="EDGEVOTE_EXECUTION_MODE")

    log_dir: str = Field(default="~/.edgevote/logs", alias="EDGEVOTE_LOG_DIR")
    log_level: str = Field(default="WARNING", alias="EDGEVOTE_LOG_LEVEL")

    # Relative --out paths are resolved against this directory
    output_dir: str = Field(default=".", alias="EDGEVOTE_OUTPUT_DIR")

    @field_validator("execution_mode", mode="after")
    @classmethod
    def validate_execution_mode(cls, v: str) -> str:
        """Validate execution mode value."""
        valid_modes = {"auto", "parallel", "sequential"}
        if v not in valid_modes:
            raise ValueError(f"execution_mode must be one of {valid_modes}")
        return v

    @field_validator("log_level", mode="after")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate and normalize the log level name."""
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level

    @property
    def runs_sequentially(self) -> bool:
        """Whether fan-out should run one task at a time."""
        if self.execution_mode == "sequential":
            return True
        if self.execution_mode == "parallel":
            return False
        return self.threads == 1


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# =============================================================================
# Experiment documents
# =============================================================================

class SourceConfig(BaseModel):
    """Generative-source description as it appears in JSON configs.

    Exactly one edge description is used: ``gamma`` for a uniform edge,
    ``gamma_min``/``gamma_max`` for a uniform grid over an interval, or
    ``edges`` for an explicit per-variable list.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    N: int = Field(ge=1)
    K: int = Field(ge=1)
    gamma: Rational | None = None
    gamma_min: Rational | None = None
    gamma_max: Rational | None = None
    edges: list[Rational] | None = None
    polarity: Literal["all_positive", "half_half"] | list[int] = "all_positive"
    structure: Literal["independent", "block_clique"] = "independent"
    r: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_edges(self) -> SourceConfig:
        """Require exactly one edge description and consistent sizes."""
        given = [
            self.gamma is not None,
            self.gamma_min is not None or self.gamma_max is not None,
            self.edges is not None,
        ]
        if sum(given) != 1:
            raise ValueError("give exactly one of gamma, gamma_min/gamma_max, edges")
        if given[1] and (self.gamma_min is None or self.gamma_max is None):
            raise ValueError("gamma_min and gamma_max must be given together")
        if self.K > self.N:
            raise ValueError(f"K={self.K} exceeds N={self.N}")
        if self.edges is not None and len(self.edges) != self.K:
            raise ValueError(f"edges has {len(self.edges)} entries, expected K={self.K}")
        if isinstance(self.polarity, list) and len(self.polarity) != self.K:
            raise ValueError(f"polarity has {len(self.polarity)} entries, expected K={self.K}")
        if self.structure == "block_clique" and self.gamma is None:
            raise ValueError("block_clique sources need a uniform gamma")
        return self

    def to_spec(self):
        """Build the SourceSpec this document describes."""
        from .source import Structure, make_hetero_spec, make_spec

        structure = (
            Structure.BLOCK_CLIQUE if self.structure == "block_clique" else Structure.INDEPENDENT
        )
        if self.gamma is not None:
            return make_spec(self.N, self.K, self.gamma, self.polarity, structure, r=self.r)
        if self.edges is not None:
            return make_hetero_spec(
                self.N, self.K, min(self.edges), max(self.edges), self.edges,
                polarity=self.polarity,
            )
        return make_hetero_spec(
            self.N, self.K, self.gamma_min, self.gamma_max, "grid", polarity=self.polarity
        )


class ExperimentConfig(BaseModel):
    """One sweep: a source, a training size, a beta grid and replicates."""

    model_config = ConfigDict(extra="forbid")

    source: SourceConfig
    m: int = Field(ge=1)
    betas: list[Rational] = Field(min_length=1)
    replicates: int = Field(default=1, ge=1)
    trials: int = Field(default=DEFAULT_MC_TRIALS, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    error_mode: Literal["exact", "mc"] = "exact"
    positive_only: bool = False
    rank_edges: bool = False
    output: str | None = None

    @field_validator("betas", mode="after")
    @classmethod
    def validate_betas(cls, v: list[Fraction]) -> list[Fraction]:
        """Beta grid must be sorted ascending inside [0, 1/2]."""
        if any(b < 0 or b > Fraction(1, 2) for b in v):
            raise ValueError("every beta must lie in [0, 1/2]")
        if any(a > b for a, b in zip(v, v[1:])):
            raise ValueError("beta grid must be sorted ascending")
        return v

    def fingerprint(self) -> str:
        """Short stable hash of the config (output path excluded)."""
        payload = self.model_dump_json(exclude={"output"})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class AuditGrid(BaseModel):
    """Parameter grid for a tail-bound audit.

    ``etas`` drive the threshold for every bound except four_mean_upper,
    which uses ``deltas``. ``ps`` is ignored by bounds that fix p. With
    ``integer_steps`` the etas become j/ell for every integer j with
    j/ell <= max(etas), which is the only lattice fair_coin_lower admits.
    """

    model_config = ConfigDict(extra="forbid")

    ells: list[int] = Field(min_length=1)
    etas: list[Rational] = Field(default_factory=list)
    ps: list[Rational] = Field(default_factory=lambda: [Fraction(1, 2)])
    deltas: list[Rational] = Field(default_factory=list)
    integer_steps: bool = False

    @field_validator("ells", mode="after")
    @classmethod
    def validate_ells(cls, v: list[int]) -> list[int]:
        """Trial counts must be positive."""
        if any(ell < 1 for ell in v):
            raise ValueError("every ell must be positive")
        return v

    @field_validator("ps", mode="after")
    @classmethod
    def validate_ps(cls, v: list[Fraction]) -> list[Fraction]:
        """Success probabilities must lie strictly inside (0, 1)."""
        if any(not 0 < p < 1 for p in v):
            raise ValueError("every p must lie in (0, 1)")
        return v


class TheoremParams(BaseModel):
    """Parameters for ``bounds theorem``; each bound reads the fields it needs."""

    model_config = ConfigDict(extra="forbid")

    N: int | None = Field(default=None, ge=1)
    K: int | None = Field(default=None, ge=0)
    n: int | None = Field(default=None, ge=1)
    k: int | None = Field(default=None, ge=0)
    l: int | None = Field(default=None, ge=0)  # noqa: E741
    m: int | None = Field(default=None, ge=1)
    gamma: Rational | None = None
    gamma_min: Rational | None = None
    gamma_max: Rational | None = None
    beta: Rational | None = None
    delta: Rational | None = None
    c_frac: Rational | None = None
    r: int | None = Field(default=None, ge=0)
    c: float = 1.0

    def require(self, *names: str) -> tuple:
        """Return the named fields, failing if any is missing."""
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ParameterDomainError(f"missing parameters: {', '.join(missing)}")
        return tuple(getattr(self, name) for name in names)


class DependenceConfig(BaseModel):
    """Fixed vote over a block-clique source: all K relevant variables plus irrelevant ones."""

    model_config = ConfigDict(extra="forbid")

    N: int = Field(ge=1)
    K: int = Field(ge=1)
    gamma: Rational
    irrelevant: int = Field(default=0, ge=0)
    trials: int = Field(default=DEFAULT_MC_TRIALS, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def check_sizes(self) -> DependenceConfig:
        """The voted variables must fit inside N."""
        if self.K + self.irrelevant > self.N:
            raise ValueError(f"K + irrelevant = {self.K + self.irrelevant} exceeds N={self.N}")
        return self
