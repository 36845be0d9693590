"""Base class for experiments with shared functionality."""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence, TypeVar

import numpy as np

from ..parallel import run_blocking
from ..source import SourceSpec
from ..storage import write_csv
from ..vote import Composition, VoteModel, exact_error, exact_error_hetero, mc_error

logger = logging.getLogger(__name__)

T = TypeVar("T")


# =============================================================================
# Records
# =============================================================================

@dataclass(frozen=True)
class ExperimentRecord:
    """One sweep point: a learned model's composition, error and bounds."""
    fingerprint: str
    replicate: int
    beta: Fraction
    composition: Composition
    exclusivity: float | None
    error: float
    error_se: float | None = None
    t1_bound: float | None = None
    t2_bound: float | None = None
    t3_bound: float | None = None
    rank_edge: Fraction | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.error <= 1.0:
            raise ValueError(f"error must lie in [0, 1], got {self.error}")

    @property
    def irrelevant_fraction(self) -> float | None:
        if self.exclusivity is None:
            return None
        return 1.0 - self.exclusivity

    def as_row(self) -> dict[str, Any]:
        comp = self.composition
        return {
            "replicate": self.replicate,
            "beta_num": self.beta.numerator,
            "beta_den": self.beta.denominator,
            "n": comp.n,
            "k": comp.k,
            "l": comp.l,
            "irrelevant": comp.irrelevant,
            "exclusivity": self.exclusivity,
            "error": self.error,
            "error_se": self.error_se,
            "t1_bound": self.t1_bound,
            "t2_bound": self.t2_bound,
            "t3_bound": self.t3_bound,
            "rank_edge": None if self.rank_edge is None else str(self.rank_edge),
        }


def replicate_seeds(master_seed: int, count: int) -> list[int]:
    """Independent 64-bit sub-seeds derived from a master seed."""
    state = np.random.SeedSequence(master_seed).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def mean_and_se(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error (0 for a single value)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return math.nan, math.nan
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def feature_probs(model: VoteModel, spec: SourceSpec) -> list[Fraction]:
    """Probability that each feature of a model agrees with the label."""
    half = Fraction(1, 2)
    probs = []
    for index, negated in model.features:
        edge = spec.edge_of.get(index, Fraction(0))
        probs.append(half - edge if negated else half + edge)
    return probs


def model_error(
    model: VoteModel,
    spec: SourceSpec,
    comp: Composition,
    *,
    mode: str = "exact",
    trials: int = 0,
    seed: int = 0,
) -> tuple[float, float | None]:
    """Test error of a model on a source, exactly or by Monte Carlo.

    Exact mode needs independent variables; block-clique sources with
    r > 0 always fall back to Monte Carlo. An empty model errs half the
    time whatever its default label.

    Returns:
        ``(error, standard_error)``; the SE is None for exact values.
    """
    if model.n == 0:
        return 0.5, None
    if mode == "mc" or spec.r > 0:
        return mc_error(model, spec, trials, seed)
    if spec.gamma_min == spec.gamma_max:
        return exact_error(comp, spec.gamma_min), None
    return exact_error_hetero(feature_probs(model, spec)), None


# =============================================================================
# Base experiment
# =============================================================================

class BaseExperiment(ABC):
    """Abstract base class for experiments.

    Provides shared functionality:
    - Replicate seeding
    - Fan-out of replicate work to the worker pool
    - CSV emission
    """

    columns: tuple[str, ...] = ()

    def __init__(self, seed: int = 0):
        self.seed = seed

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the experiment name (e.g. 'sweep', 'fig2')."""
        ...

    @abstractmethod
    def run(self) -> Any:
        """Run the experiment and return its records or summary."""
        ...

    @abstractmethod
    def rows(self, result: Any) -> list[dict[str, Any]]:
        """Flatten a result into CSV rows."""
        ...

    def _fan_out(self, tasks: Sequence[Callable[[], T]]) -> list[T]:
        """Run per-replicate tasks on the worker pool, results in task order."""
        logger.info("%s: running %d tasks", self.name, len(tasks))
        return run_blocking(tasks, label=self.name)

    def write(self, result: Any, path: str | Path) -> Path:
        return write_csv(self.rows(result), self.columns, path)
