"""Canonical synthetic benchmark: many weak relevant variables among 10^5."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from fractions import Fraction

from ..config import ExperimentConfig, SourceConfig
from ..constants import (
    FEW_IRRELEVANT_FRACTION,
    FIG2_BETA_MAX,
    FIG2_BETA_STEP,
    FIG2_GAMMA,
    FIG2_K,
    FIG2_M,
    FIG2_N,
    FIG2_REPLICATES,
)
from .base import BaseExperiment, ExperimentRecord
from .sweep import SweepExperiment

logger = logging.getLogger(__name__)


def fig2_config(seed: int, replicates: int = FIG2_REPLICATES) -> ExperimentConfig:
    """N=10^5, K=1000 split evenly by polarity, gamma=1/10, m=100, beta in 0..3/10."""
    steps = int(FIG2_BETA_MAX / FIG2_BETA_STEP)
    return ExperimentConfig(
        source=SourceConfig(N=FIG2_N, K=FIG2_K, gamma=FIG2_GAMMA, polarity="half_half"),
        m=FIG2_M,
        betas=[FIG2_BETA_STEP * i for i in range(steps + 1)],
        replicates=replicates,
        seed=seed,
    )


@dataclass(frozen=True)
class RunSummary:
    """Best model of one training run and how low-irrelevance models compare."""
    replicate: int
    best_beta: Fraction
    best_error: float
    best_irrelevant_fraction: float | None
    min_error_few_irrelevant: float | None

    @property
    def few_irrelevant_ratio(self) -> float | None:
        """Best error among models with few irrelevant variables over the overall best."""
        if self.min_error_few_irrelevant is None or self.best_error == 0:
            return None
        return self.min_error_few_irrelevant / self.best_error


def summarize_run(replicate: int, records: list[ExperimentRecord]) -> RunSummary:
    """Summarize one replicate's sweep; ties in error go to the smaller beta."""
    best = min(records, key=lambda r: (r.error, r.beta))
    few = [
        r.error for r in records
        if r.irrelevant_fraction is not None and r.irrelevant_fraction < FEW_IRRELEVANT_FRACTION
    ]
    return RunSummary(
        replicate=replicate,
        best_beta=best.beta,
        best_error=best.error,
        best_irrelevant_fraction=best.irrelevant_fraction,
        min_error_few_irrelevant=min(few) if few else None,
    )


class Fig2Experiment(BaseExperiment):
    """Three training runs of the canonical benchmark, one summary per run."""

    columns = (
        "replicate", "best_beta", "best_error", "best_irrelevant_fraction",
        "min_error_few_irrelevant",
    )

    def __init__(self, seed: int = 1, replicates: int = FIG2_REPLICATES):
        super().__init__(seed)
        self.config = fig2_config(seed, replicates)

    @property
    def name(self) -> str:
        return "fig2"

    def run(self) -> list[RunSummary]:
        records = SweepExperiment(self.config).run()
        summaries = []
        for replicate in range(self.config.replicates):
            run = [r for r in records if r.replicate == replicate]
            summary = summarize_run(replicate, run)
            logger.info(
                "fig2 run %d: best beta=%s error=%.4f irrelevant=%s",
                replicate, summary.best_beta, summary.best_error,
                summary.best_irrelevant_fraction,
            )
            summaries.append(summary)
        self.records = records
        return summaries

    def rows(self, result: list[RunSummary]) -> list[dict]:
        rows = []
        for summary in result:
            row = asdict(summary)
            row["best_beta"] = str(summary.best_beta)
            rows.append(row)
        return rows


def repro_fig2(seed: int = 1) -> list[RunSummary]:
    return Fig2Experiment(seed).run()
