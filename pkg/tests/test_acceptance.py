"""Acceptance-scale simulations.

These take minutes, so they only run with ``pytest -m slow``.
"""

import math
from fractions import Fraction

import pytest

from edgevote.config import ExperimentConfig
from edgevote.experiments.dominance import dominance_study
from edgevote.experiments.exclusivity import exclusivity_profile
from edgevote.experiments.fig2 import repro_fig2
from edgevote.experiments.irrelevant import irrelevant_count_study
from edgevote.tails import audit_all
from edgevote.vote import Composition, exact_error, theorem1_bound

pytestmark = [pytest.mark.slow, pytest.mark.timeout(3600)]

F = Fraction


class TestTailAudit:
    """Every bound holds on its default grid."""

    def test_no_violations(self):
        reports = audit_all()
        assert len(reports) == 7
        for report in reports:
            assert report.violations == [], report.bound_id.value
            assert len(report.records) > len(report.skipped)


class TestTheorem1Lattice:
    """Theorem 1 against exact error for every n up to 2000 in steps of 20."""

    @pytest.mark.parametrize("gamma", [F(1, 20), F(1, 10), F(1, 4)])
    def test_bound_dominates(self, gamma):
        for n in range(20, 2_001, 20):
            step = n // 20
            for k in range(0, n + 1, step):
                for l in range(0, n - k + 1, step):
                    comp = Composition(n, k, l)
                    assert exact_error(comp, gamma) <= theorem1_bound(comp, gamma) + 1e-12, (n, k, l)


class TestBenchmark:
    """The 10^5-variable benchmark with weak relevant variables."""

    @pytest.fixture(scope="class", params=[1, 2, 3])
    def summaries(self, request):
        return repro_fig2(seed=request.param)

    def test_three_runs(self, summaries):
        assert [s.replicate for s in summaries] == [0, 1, 2]

    def test_best_model_is_accurate_but_mostly_irrelevant(self, summaries):
        for summary in summaries:
            assert summary.best_error < 0.10
            assert summary.best_irrelevant_fraction > 0.5

    def test_few_irrelevant_models_do_worse(self, summaries):
        for summary in summaries:
            assert summary.few_irrelevant_ratio is not None
            assert summary.few_irrelevant_ratio >= 2


DOMINANCE_CONFIGS = [
    ({"N": 10_000, "K": 5_000, "gamma": "1/10"}, 2_000, "1/20"),
    ({"N": 20_000, "K": 2_000, "gamma": "1/10"}, 700, "1/20"),
    ({"N": 5_000, "K": 1_000, "gamma": "1/10"}, 1_000, "1/20"),
    ({"N": 2_000, "K": 500, "gamma": "1/5"}, 300, "1/10"),
    ({"N": 4_000, "K": 400, "gamma": "3/20"}, 500, "3/40"),
]


class TestLearningBounds:
    """Replicate means against the learning bounds and the irrelevant floor."""

    @pytest.mark.parametrize(("source", "m", "beta"), DOMINANCE_CONFIGS)
    def test_dominance(self, source, m, beta):
        config = ExperimentConfig.model_validate(
            {"source": source, "m": m, "betas": [beta], "replicates": 200, "seed": 11}
        )
        (record,) = dominance_study(config)
        assert record.replicates == 200
        assert record.t2_holds is True
        assert record.passed

    def test_sample_threshold_point_checks_both_bounds(self):
        config = ExperimentConfig.model_validate(
            {
                "source": {"N": 20_000, "K": 2_000, "gamma": "1/10"},
                "m": 700,
                "betas": ["1/20"],
                "replicates": 200,
                "seed": 11,
            }
        )
        (record,) = dominance_study(config)
        assert record.t3_holds is True
        assert record.t3_bound == pytest.approx(math.exp(-2))

    def test_irrelevant_count_floor(self):
        config = ExperimentConfig.model_validate(
            {
                "source": {"N": 2_000, "K": 100, "gamma": "1/10"},
                "m": 100,
                "betas": ["0"],
                "replicates": 500,
                "seed": 5,
            }
        )
        report = irrelevant_count_study(config, "1/20")
        assert report.floor == pytest.approx(1_900 * math.exp(-4))
        assert report.passed


class TestExclusivity:
    """Inclusive and exclusive learners at the separation regime."""

    @pytest.fixture(scope="class")
    def reports(self):
        return exclusivity_profile([F(1, 5), F(3, 20), F(1, 10)], replicates=100, seed=7)

    def test_one_report_per_gamma(self, reports):
        assert [r.gamma for r in reports] == [F(1, 5), F(3, 20), F(1, 10)]
        assert all(r.replicates == 100 for r in reports)

    def test_inclusive_learner_is_more_accurate(self, reports):
        for report in reports:
            assert report.error_inclusive < report.error_exclusive, report.gamma

    def test_inclusive_learner_keeps_more_relevant_variables(self, reports):
        for report in reports:
            assert report.lambda_inclusive > report.lambda_exclusive, report.gamma
