"""How many irrelevant variables the threshold learner keeps, against its floor."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from fractions import Fraction

from ..config import ExperimentConfig, parse_rational
from ..constants import MC_SE_MULTIPLIER
from ..theory import expected_irrelevant_floor
from .base import BaseExperiment, mean_and_se
from .sweep import SweepExperiment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IrrelevantCountReport:
    beta: Fraction
    replicates: int
    mean_irrelevant: float
    se: float
    floor: float

    @property
    def passed(self) -> bool:
        return self.mean_irrelevant >= self.floor - MC_SE_MULTIPLIER * self.se


class IrrelevantCountExperiment(BaseExperiment):
    """Replicate-mean irrelevant count of the model learned at one beta."""

    columns = ("beta", "replicates", "mean_irrelevant", "se", "floor", "passed")

    def __init__(self, config: ExperimentConfig, beta):
        super().__init__(config.seed)
        self.beta = parse_rational(beta)
        self.config = config.model_copy(update={"betas": [self.beta]})

    @property
    def name(self) -> str:
        return "irrelevant"

    def run(self) -> IrrelevantCountReport:
        records = SweepExperiment(self.config).run()
        mean, se = mean_and_se([r.composition.irrelevant for r in records])
        source = self.config.source
        floor = expected_irrelevant_floor(source.N, source.K, self.beta, self.config.m)
        report = IrrelevantCountReport(self.beta, len(records), mean, se, floor)
        logger.info(
            "irrelevant count at beta=%s: %.1f +- %.1f (floor %.1f)", self.beta, mean, se, floor
        )
        return report

    def rows(self, result: IrrelevantCountReport) -> list[dict]:
        row = asdict(result)
        row["beta"] = str(result.beta)
        row["passed"] = result.passed
        return [row]


def irrelevant_count_study(config: ExperimentConfig, beta) -> IrrelevantCountReport:
    return IrrelevantCountExperiment(config, beta).run()
