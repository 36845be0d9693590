"""Replicate-mean error of the threshold learner against its finite-sample bounds."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from ..config import ExperimentConfig
from ..constants import DOMINANCE_SE_MULTIPLIER, FINITE_FORM_CEILING
from .base import BaseExperiment, mean_and_se
from .sweep import SweepExperiment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DominanceRecord:
    """Mean error at one beta and whether each bound covers it.

    A check is None when the bound does not apply or is too loose
    (at least FINITE_FORM_CEILING) to be informative.
    """
    beta: Fraction
    replicates: int
    mean_error: float
    se: float
    t2_bound: float | None
    t3_bound: float | None
    t2_holds: bool | None
    t3_holds: bool | None

    @property
    def passed(self) -> bool:
        return self.t2_holds is not False and self.t3_holds is not False


def _covers(bound: float | None, mean: float, se: float) -> bool | None:
    if bound is None or bound >= FINITE_FORM_CEILING:
        return None
    return mean <= bound + DOMINANCE_SE_MULTIPLIER * se


class DominanceExperiment(BaseExperiment):
    """Run a sweep and compare each beta's mean error with the theorem bounds."""

    columns = (
        "beta", "replicates", "mean_error", "se", "t2_bound", "t3_bound", "t2_holds", "t3_holds",
    )

    def __init__(self, config: ExperimentConfig):
        super().__init__(config.seed)
        self.config = config

    @property
    def name(self) -> str:
        return "dominance"

    def run(self) -> list[DominanceRecord]:
        records = SweepExperiment(self.config).run()
        results = []
        for beta in self.config.betas:
            cell = [r for r in records if r.beta == beta]
            mean, se = mean_and_se([r.error for r in cell])
            t2, t3 = cell[0].t2_bound, cell[0].t3_bound
            result = DominanceRecord(
                beta, len(cell), mean, se, t2, t3, _covers(t2, mean, se), _covers(t3, mean, se),
            )
            if not result.passed:
                logger.warning(
                    "dominance: beta=%s mean error %.3g exceeds bound (t2=%s, t3=%s)",
                    beta, mean, t2, t3,
                )
            results.append(result)
        return results

    def rows(self, result: list[DominanceRecord]) -> list[dict]:
        return [
            {
                "beta": str(r.beta),
                "replicates": r.replicates,
                "mean_error": r.mean_error,
                "se": r.se,
                "t2_bound": r.t2_bound,
                "t3_bound": r.t3_bound,
                "t2_holds": r.t2_holds,
                "t3_holds": r.t3_holds,
            }
            for r in result
        ]


def dominance_study(config: ExperimentConfig) -> list[DominanceRecord]:
    return DominanceExperiment(config).run()
