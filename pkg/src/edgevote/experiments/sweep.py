"""Beta sweep: learn a threshold model per beta and score it against the bounds."""

from __future__ import annotations

import logging
from fractions import Fraction

from ..config import ExperimentConfig
from ..constants import SWEEP_COLUMNS
from ..learner import empirical_edges, rank_threshold, select_model, select_positive_model
from ..source import SourceSpec, draw_dataset
from ..theory import theorem2_bound, theorem2_hetero_bound, theorem3_bound
from ..vote import Composition, composition_of, hetero_bound, theorem1_bound
from .base import BaseExperiment, ExperimentRecord, model_error, replicate_seeds

logger = logging.getLogger(__name__)


def record_bounds(
    spec: SourceSpec, comp: Composition, m: int, beta: Fraction
) -> tuple[float | None, float | None, float | None]:
    """Theorem 1/2/3 values that apply to a model learned at beta.

    A bound whose precondition fails is None. Dependent sources get none.
    """
    if spec.r > 0:
        return None, None, None
    lo, hi = spec.gamma_min, spec.gamma_max
    N, K = spec.N, spec.K

    t1 = t2 = t3 = None
    if lo == hi:
        if comp.n:
            t1 = theorem1_bound(comp, lo)
        if beta <= lo:
            t2 = theorem2_bound(N, K, lo, m, beta).bound
        if beta < lo:
            result = theorem3_bound(N, K, lo, m, beta / lo)
            if result.applicable:
                t3 = result.bound
    else:
        if comp.n:
            t1 = hetero_bound(comp.n, comp.k, comp.l, lo, hi)
        if beta <= lo:
            t2 = theorem2_hetero_bound(N, K, lo, hi, m, beta)
    return t1, t2, t3


class SweepExperiment(BaseExperiment):
    """Replicates of one source, each swept over the config's beta grid.

    Every replicate draws its own training set from a sub-seed of the
    master seed, so records are reproducible per (config, seed) and do not
    depend on how replicates are spread over workers.
    """

    columns = SWEEP_COLUMNS

    def __init__(self, config: ExperimentConfig):
        super().__init__(config.seed)
        self.config = config
        self.spec = config.source.to_spec()
        if config.rank_edges:
            self.columns = SWEEP_COLUMNS + ("rank_edge",)

    @property
    def name(self) -> str:
        return "sweep"

    def _replicate(self, replicate: int, seed: int) -> list[ExperimentRecord]:
        config, spec = self.config, self.spec
        dataset = draw_dataset(spec, config.m, seed)
        table = empirical_edges(dataset)
        fingerprint = config.fingerprint()
        select = select_positive_model if config.positive_only else select_model

        records = []
        for beta in config.betas:
            model = select(table, beta)
            report = composition_of(model, spec)
            comp = report.composition
            error, se = model_error(
                model, spec, comp, mode=config.error_mode, trials=config.trials, seed=seed
            )
            t1, t2, t3 = record_bounds(spec, comp, config.m, beta)
            rank_edge = None
            if config.rank_edges and model.n:
                rank_edge = rank_threshold(table, model.n)
            records.append(
                ExperimentRecord(
                    fingerprint, replicate, beta, comp, report.exclusivity,
                    error, se, t1, t2, t3, rank_edge,
                )
            )
        logger.info("sweep replicate %d: %d betas done", replicate, len(records))
        return records

    def run(self) -> list[ExperimentRecord]:
        seeds = replicate_seeds(self.seed, self.config.replicates)
        per_replicate = self._fan_out(
            [lambda r=r, s=s: self._replicate(r, s) for r, s in enumerate(seeds)]
        )
        return [record for records in per_replicate for record in records]

    def rows(self, result: list[ExperimentRecord]) -> list[dict]:
        return [record.as_row() for record in result]


def run_sweep(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Records ordered by (replicate, beta)."""
    return SweepExperiment(config).run()
