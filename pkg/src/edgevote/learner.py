"""Threshold learners that keep every feature with a large empirical edge."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import parse_rational
from .errors import ParameterDomainError
from .source import Dataset
from .vote import Feature, VoteModel

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


@dataclass(frozen=True, eq=False)
class EdgeTable:
    """Per-variable agreement counts with the label over m examples.

    The negation of variable i agrees ``m - counts[i]`` times.
    """
    counts: np.ndarray
    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ParameterDomainError(f"m must be positive, got {self.m}")
        if self.counts.size and (self.counts.min() < 0 or self.counts.max() > self.m):
            raise ParameterDomainError("agreement counts must lie in [0, m]")
        self.counts.setflags(write=False)

    @property
    def N(self) -> int:
        return int(self.counts.size)

    def edge(self, index: int) -> Fraction:
        """Empirical edge count/m - 1/2 as an exact rational."""
        return Fraction(int(self.counts[index]), self.m) - HALF

    def edges(self) -> list[Fraction]:
        return [self.edge(i) for i in range(self.N)]


def empirical_edges(dataset: Dataset) -> EdgeTable:
    """Count how often each variable equals the label."""
    agree = dataset.values == dataset.labels[:, None]
    counts = agree.sum(axis=0, dtype=np.int64)
    return EdgeTable(counts, dataset.m)


def _check_beta(beta, lower: Fraction = Fraction(0)) -> Fraction:
    beta = parse_rational(beta)
    if not lower <= beta <= HALF:
        raise ParameterDomainError(f"beta must lie in [{lower}, 1/2], got {beta}")
    return beta


def _qualifies(counts: np.ndarray, m: int, beta: Fraction) -> np.ndarray:
    # count >= m (1/2 + beta)  <=>  2 c den >= m (den + 2 num)
    num, den = beta.numerator, beta.denominator
    # object dtype keeps the products exact for any denominator
    lhs = 2 * np.asarray(counts).astype(object) * den
    return np.asarray(lhs >= m * (den + 2 * num), dtype=bool)


def candidate_features(table: EdgeTable, beta) -> set[Feature]:
    """Every signed feature whose agreement reaches 1/2 + beta, before cancellation."""
    beta = _check_beta(beta)
    pos = np.nonzero(_qualifies(table.counts, table.m, beta))[0]
    neg = np.nonzero(_qualifies(table.m - table.counts, table.m, beta))[0]
    return {(int(i), False) for i in pos} | {(int(i), True) for i in neg}


def select_model(dataset: Dataset | EdgeTable, beta) -> VoteModel:
    """Vote over all features agreeing with the label on at least 1/2 + beta of the sample.

    A variable whose both signs qualify (possible only at beta = 0 with m
    even) contributes nothing and is dropped.
    """
    table = dataset if isinstance(dataset, EdgeTable) else empirical_edges(dataset)
    candidates = candidate_features(table, beta)
    model = VoteModel.from_features(candidates, default_label=1)
    canceled = len(candidates) - model.n
    if canceled:
        logger.debug("select_model: %d canceling pairs removed at beta=%s", canceled // 2, beta)
    return model


def select_positive_model(dataset: Dataset | EdgeTable, beta) -> VoteModel:
    """Vote over un-negated variables with empirical edge at least beta (beta >= 0)."""
    beta = _check_beta(beta)
    table = dataset if isinstance(dataset, EdgeTable) else empirical_edges(dataset)
    pos = np.nonzero(_qualifies(table.counts, table.m, beta))[0]
    return VoteModel(tuple((int(i), False) for i in pos), default_label=1)


def _ranking(table: EdgeTable) -> np.ndarray:
    # Largest count first, lower index first among equals
    return np.lexsort((np.arange(table.N), -table.counts))


def rank_threshold(dataset: Dataset | EdgeTable, j: int) -> Fraction:
    """The j-th largest variable edge, ties broken by variable index.

    Raises:
        ParameterDomainError: If j is outside [1, N].
    """
    table = dataset if isinstance(dataset, EdgeTable) else empirical_edges(dataset)
    if not 1 <= j <= table.N:
        raise ParameterDomainError(f"j must lie in [1, {table.N}], got {j}")
    return table.edge(int(_ranking(table)[j - 1]))


def top_j_model(dataset: Dataset | EdgeTable, j: int) -> VoteModel:
    """Positive vote over the j variables ranked highest by empirical edge."""
    table = dataset if isinstance(dataset, EdgeTable) else empirical_edges(dataset)
    if not 0 <= j <= table.N:
        raise ParameterDomainError(f"j must lie in [0, {table.N}], got {j}")
    chosen = _ranking(table)[:j]
    return VoteModel(tuple((int(i), False) for i in chosen), default_label=1)
