"""Error of a fixed vote as relevant variables become locally dependent."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Sequence

from ..config import DependenceConfig
from ..errors import ParameterDomainError
from ..source import Structure, make_spec
from ..vote import Composition, VoteModel, dependence_bound, exact_error, mc_error
from .base import BaseExperiment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DependenceRecord:
    r: int
    n: int
    k: int
    error: float
    error_se: float
    bound: float | None
    exact_independent: float


class DependenceExperiment(BaseExperiment):
    """Monte Carlo error per clique size, next to the dependence bound at c = 1.

    The model votes every relevant variable positively plus the first
    ``irrelevant`` irrelevant ones. All r share the master seed.
    """

    columns = ("r", "n", "k", "error", "error_se", "bound", "exact_independent")

    def __init__(self, rs: Sequence[int], config: DependenceConfig):
        super().__init__(config.seed)
        if any(r < 0 for r in rs):
            raise ParameterDomainError("every r must be non-negative")
        self.rs = list(rs)
        self.config = config

    @property
    def name(self) -> str:
        return "dependence"

    def _model(self) -> VoteModel:
        n = self.config.K + self.config.irrelevant
        return VoteModel(tuple((i, False) for i in range(n)))

    def _one(self, r: int) -> DependenceRecord:
        config = self.config
        spec = make_spec(config.N, config.K, config.gamma, "all_positive", Structure.BLOCK_CLIQUE, r)
        model = self._model()
        error, se = mc_error(model, spec, config.trials, config.seed)
        bound = None
        if 2 * r <= model.n:
            bound = dependence_bound(model.n, config.K, r, config.gamma)
        exact = exact_error(Composition(model.n, config.K, 0), config.gamma)
        logger.info("dependence r=%d: error=%.4f +- %.4f", r, error, se)
        return DependenceRecord(r, model.n, config.K, error, se, bound, exact)

    def run(self) -> list[DependenceRecord]:
        return self._fan_out([lambda r=r: self._one(r) for r in self.rs])

    def rows(self, result: list[DependenceRecord]) -> list[dict]:
        return [asdict(record) for record in result]


def dependence_study(rs: Sequence[int], config: DependenceConfig) -> list[DependenceRecord]:
    return DependenceExperiment(rs, config).run()
