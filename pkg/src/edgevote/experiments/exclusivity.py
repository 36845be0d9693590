"""Inclusive versus exclusive learners in the regime where they separate.

For each gamma the source comes from regime_params. Each replicate trains
two models on the same sample: the inclusive threshold learner at
beta = gamma/2, and the positive vote over variables whose empirical edge
reaches the critical value beta*.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..config import parse_rational
from ..errors import ParameterDomainError
from ..learner import (
    EdgeTable,
    empirical_edges,
    rank_threshold,
    select_model,
    select_positive_model,
)
from ..source import draw_dataset, make_spec
from ..theory import RegimeParams, regime_params
from ..vote import VoteModel, composition_of
from .base import BaseExperiment, mean_and_se, model_error, replicate_seeds

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearnerOutcome:
    """One learner on one replicate."""
    error: float
    relevant_fraction: float | None
    reaches_beta_star: bool | None


@dataclass(frozen=True)
class ExclusivityReport:
    """Per-gamma comparison of the two learners over replicates.

    ``lambda_*`` is the mean fraction of a hypothesis's variables that are
    relevant (empty hypotheses excluded); ``q_*`` is how often the
    n-th largest empirical edge, n the hypothesis size, reaches beta*.
    """
    gamma: Fraction
    params: RegimeParams
    replicates: int
    lambda_inclusive: float
    lambda_exclusive: float
    q_inclusive: float
    q_exclusive: float
    error_inclusive: float
    error_inclusive_se: float
    error_exclusive: float
    error_exclusive_se: float
    errors_inclusive: tuple[float, ...]
    errors_exclusive: tuple[float, ...]


def _outcome(model: VoteModel, table: EdgeTable, spec, beta_star: Fraction) -> LearnerOutcome:
    report = composition_of(model, spec)
    error, _ = model_error(model, spec, report.composition)
    reaches = None
    if model.n:
        reaches = rank_threshold(table, model.n) >= beta_star
    return LearnerOutcome(error, report.exclusivity, reaches)


def _mean_defined(values: Sequence) -> float:
    defined = [float(v) for v in values if v is not None]
    return mean_and_se(defined)[0]


class ExclusivityExperiment(BaseExperiment):
    """Exclusivity and error of both learners for a list of gammas."""

    columns = (
        "gamma", "K", "N", "m", "beta_star", "replicates",
        "lambda_inclusive", "lambda_exclusive", "q_inclusive", "q_exclusive",
        "error_inclusive", "error_inclusive_se", "error_exclusive", "error_exclusive_se",
    )

    def __init__(self, gammas: Sequence, replicates: int = 100, seed: int = 0):
        super().__init__(seed)
        if replicates < 1:
            raise ParameterDomainError(f"replicates must be positive, got {replicates}")
        self.gammas = [parse_rational(g) for g in gammas]
        self.replicates = replicates

    @property
    def name(self) -> str:
        return "exclusivity"

    def _replicate(self, params: RegimeParams, seed: int) -> tuple[LearnerOutcome, LearnerOutcome]:
        spec = make_spec(params.N, params.K, params.gamma)
        beta_star = Fraction(params.beta_star)
        table = empirical_edges(draw_dataset(spec, params.m, seed))
        inclusive = select_model(table, params.gamma / 2)
        exclusive = select_positive_model(table, beta_star)
        return _outcome(inclusive, table, spec, beta_star), _outcome(exclusive, table, spec, beta_star)

    def _report(self, params: RegimeParams, outcomes) -> ExclusivityReport:
        inc = [o[0] for o in outcomes]
        exc = [o[1] for o in outcomes]
        err_inc, se_inc = mean_and_se([o.error for o in inc])
        err_exc, se_exc = mean_and_se([o.error for o in exc])
        return ExclusivityReport(
            gamma=params.gamma,
            params=params,
            replicates=len(outcomes),
            lambda_inclusive=_mean_defined([o.relevant_fraction for o in inc]),
            lambda_exclusive=_mean_defined([o.relevant_fraction for o in exc]),
            q_inclusive=_mean_defined([o.reaches_beta_star for o in inc]),
            q_exclusive=_mean_defined([o.reaches_beta_star for o in exc]),
            error_inclusive=err_inc,
            error_inclusive_se=se_inc,
            error_exclusive=err_exc,
            error_exclusive_se=se_exc,
            errors_inclusive=tuple(o.error for o in inc),
            errors_exclusive=tuple(o.error for o in exc),
        )

    def run(self) -> list[ExclusivityReport]:
        regimes = [regime_params(g) for g in self.gammas]
        seeds = replicate_seeds(self.seed, len(regimes) * self.replicates)
        tasks = [
            lambda p=params, s=seeds[i * self.replicates + r]: self._replicate(p, s)
            for i, params in enumerate(regimes)
            for r in range(self.replicates)
        ]
        outcomes = self._fan_out(tasks)

        reports = []
        for i, params in enumerate(regimes):
            chunk = outcomes[i * self.replicates:(i + 1) * self.replicates]
            report = self._report(params, chunk)
            logger.info(
                "exclusivity gamma=%s: error %.3g vs %.3g, lambda %.3f vs %.3f",
                params.gamma, report.error_inclusive, report.error_exclusive,
                report.lambda_inclusive, report.lambda_exclusive,
            )
            reports.append(report)
        return reports

    def rows(self, result: list[ExclusivityReport]) -> list[dict]:
        return [
            {
                "gamma": str(r.gamma),
                "K": r.params.K,
                "N": r.params.N,
                "m": r.params.m,
                "beta_star": r.params.beta_star,
                "replicates": r.replicates,
                "lambda_inclusive": r.lambda_inclusive,
                "lambda_exclusive": r.lambda_exclusive,
                "q_inclusive": r.q_inclusive,
                "q_exclusive": r.q_exclusive,
                "error_inclusive": r.error_inclusive,
                "error_inclusive_se": r.error_inclusive_se,
                "error_exclusive": r.error_exclusive,
                "error_exclusive_se": r.error_exclusive_se,
            }
            for r in result
        ]


def exclusivity_profile(gammas: Sequence, replicates: int = 100, seed: int = 0) -> list[ExclusivityReport]:
    return ExclusivityExperiment(gammas, replicates, seed).run()
