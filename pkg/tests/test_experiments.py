"""Tests for sweeps, experiment summaries and the experiment registry."""

from fractions import Fraction

import pytest

from edgevote.config import DependenceConfig, ExperimentConfig, get_settings
from edgevote.constants import SWEEP_COLUMNS
from edgevote.errors import ParameterDomainError
from edgevote.experiments import BaseExperiment, ExperimentRecord
from edgevote.experiments.base import mean_and_se, model_error, replicate_seeds
from edgevote.experiments.dependence import DependenceExperiment, dependence_study
from edgevote.experiments.dominance import DominanceExperiment
from edgevote.experiments.exclusivity import ExclusivityExperiment
from edgevote.experiments.fig2 import fig2_config, summarize_run
from edgevote.experiments.irrelevant import IrrelevantCountExperiment
from edgevote.experiments.sweep import SweepExperiment, record_bounds, run_sweep
from edgevote.harness import create_experiment, experiment_names, get_experiment_class
from edgevote.source import make_spec
from edgevote.vote import Composition, VoteModel, exact_error

F = Fraction


def sweep_config(**overrides) -> ExperimentConfig:
    fields = {
        "source": {"N": 200, "K": 20, "gamma": "1/5"},
        "m": 50,
        "betas": ["0", "1/10", "1/5"],
        "replicates": 2,
        "seed": 17,
    }
    fields.update(overrides)
    return ExperimentConfig.model_validate(fields)


class TestHelpers:
    """Tests for shared experiment helpers."""

    def test_replicate_seeds_are_stable_and_distinct(self):
        seeds = replicate_seeds(5, 4)
        assert seeds == replicate_seeds(5, 4)
        assert len(set(seeds)) == 4
        assert replicate_seeds(5, 2) == seeds[:2]
        assert all(0 <= s < 2**64 for s in seeds)

    def test_mean_and_se(self):
        assert mean_and_se([0.5]) == (0.5, 0.0)
        mean, se = mean_and_se([1.0, 2.0, 3.0])
        assert mean == 2.0
        assert se == pytest.approx(1 / 3**0.5)

    def test_empty_model_errs_half_the_time(self, small_spec):
        assert model_error(VoteModel(), small_spec, Composition(0, 0, 0)) == (0.5, None)

    def test_exact_mode_uses_exact_error(self, small_spec):
        model = VoteModel.from_features(["+0", "+1", "+30"])
        error, se = model_error(model, small_spec, Composition(3, 2, 0))
        assert se is None
        assert error == exact_error(Composition(3, 2, 0), F(1, 5))

    def test_record_rejects_bad_error(self):
        with pytest.raises(ValueError):
            ExperimentRecord("x", 0, F(0), Composition(1, 1, 0), 1.0, 1.5)

    def test_record_row_follows_columns(self):
        record = ExperimentRecord("x", 0, F(1, 10), Composition(4, 2, 1), 0.75, 0.2)
        row = record.as_row()
        assert tuple(row)[: len(SWEEP_COLUMNS)] == SWEEP_COLUMNS
        assert row["beta_num"] == 1
        assert row["beta_den"] == 10
        assert row["irrelevant"] == 1
        assert record.irrelevant_fraction == pytest.approx(0.25)


class TestSweep:
    """Tests for beta sweeps."""

    def test_records_per_replicate_and_beta(self):
        records = run_sweep(sweep_config())
        assert [(r.replicate, r.beta) for r in records] == [
            (0, F(0)), (0, F(1, 10)), (0, F(1, 5)),
            (1, F(0)), (1, F(1, 10)), (1, F(1, 5)),
        ]

    def test_reproducible(self):
        a = run_sweep(sweep_config())
        b = run_sweep(sweep_config())
        assert [r.as_row() for r in a] == [r.as_row() for r in b]

    def test_parallel_matches_sequential(self, monkeypatch):
        sequential = run_sweep(sweep_config(replicates=4))
        monkeypatch.setenv("EDGEVOTE_EXECUTION_MODE", "parallel")
        monkeypatch.setenv("EDGEVOTE_THREADS", "4")
        get_settings.cache_clear()
        parallel = run_sweep(sweep_config(replicates=4))
        assert [r.as_row() for r in parallel] == [r.as_row() for r in sequential]

    def test_models_shrink_as_beta_grows(self):
        records = run_sweep(sweep_config(replicates=1))
        sizes = [r.composition.n for r in records]
        assert sizes == sorted(sizes, reverse=True)

    def test_exact_error_never_exceeds_first_bound(self):
        for record in run_sweep(sweep_config(replicates=3)):
            if record.t1_bound is not None:
                assert record.error <= record.t1_bound + 1e-12

    def test_bounds_follow_preconditions(self):
        spec = make_spec(200, 20, F(1, 5))
        comp = Composition(40, 18, 1)
        t1, t2, t3 = record_bounds(spec, comp, 50, F(0))
        assert None not in (t1, t2, t3)
        t1, t2, t3 = record_bounds(spec, comp, 50, F(1, 10))
        assert t2 is not None and t3 is None
        t1, t2, t3 = record_bounds(spec, comp, 50, F(1, 4))
        assert t1 is not None and t2 is None and t3 is None

    def test_dependent_source_gets_no_bounds(self):
        spec = make_spec(200, 20, F(1, 5), structure="block_clique", r=1)
        assert record_bounds(spec, Composition(20, 20, 0), 50, F(0)) == (None, None, None)

    def test_interval_source_uses_interval_bounds(self):
        config = sweep_config(
            source={"N": 200, "K": 20, "gamma_min": "1/10", "gamma_max": "1/5"}, replicates=1
        )
        records = run_sweep(config)
        assert records[0].t1_bound is not None
        assert records[0].t3_bound is None
        assert all(r.error_se is None for r in records)

    def test_monte_carlo_mode(self):
        records = run_sweep(sweep_config(error_mode="mc", trials=2000, replicates=1))
        nonempty = [r for r in records if r.composition.n]
        assert nonempty
        assert all(r.error_se is not None for r in nonempty)

    def test_block_clique_falls_back_to_monte_carlo(self):
        config = sweep_config(
            source={"N": 200, "K": 20, "gamma": "1/5", "structure": "block_clique", "r": 1},
            trials=1000,
            replicates=1,
        )
        records = run_sweep(config)
        assert all(r.t2_bound is None for r in records)
        assert any(r.error_se is not None for r in records)

    def test_positive_only(self):
        records = SweepExperiment(sweep_config(positive_only=True, replicates=1)).run()
        assert all(r.composition.l == 0 for r in records)
        assert records[0].composition.n < 200

    def test_rank_edge_column(self):
        """The n-th largest edge of a positive model learned at beta is at least beta."""
        experiment = SweepExperiment(sweep_config(rank_edges=True, positive_only=True, replicates=1))
        records = experiment.run()
        assert experiment.columns[-1] == "rank_edge"
        assert any(r.rank_edge is not None for r in records)
        assert all(r.rank_edge is None or r.rank_edge >= r.beta for r in records)

    def test_write_csv(self, tmp_path):
        experiment = SweepExperiment(sweep_config(replicates=1))
        path = experiment.write(experiment.run(), "sweep.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(SWEEP_COLUMNS)
        assert len(lines) == 4


class TestFig2Summary:
    """Tests for the benchmark configuration and per-run summaries."""

    def test_config(self):
        config = fig2_config(seed=1)
        assert config.source.N == 100_000
        assert config.source.K == 1_000
        assert config.source.polarity == "half_half"
        assert config.m == 100
        assert config.betas[0] == 0
        assert config.betas[-1] == F(3, 10)
        assert config.betas[1] - config.betas[0] == F(1, 100)
        assert config.replicates == 3

    def test_summarize_run(self):
        records = [
            ExperimentRecord("x", 0, F(0), Composition(100, 10, 5), 0.15, 0.30),
            ExperimentRecord("x", 0, F(1, 10), Composition(40, 8, 2), 0.25, 0.08),
            ExperimentRecord("x", 0, F(1, 5), Composition(9, 6, 1), 0.78, 0.25),
            ExperimentRecord("x", 0, F(3, 10), Composition(0, 0, 0), None, 0.5),
        ]
        summary = summarize_run(0, records)
        assert summary.best_beta == F(1, 10)
        assert summary.best_error == 0.08
        assert summary.best_irrelevant_fraction == pytest.approx(0.75)
        assert summary.min_error_few_irrelevant == 0.25
        assert summary.few_irrelevant_ratio == pytest.approx(0.25 / 0.08)

    def test_ties_go_to_smaller_beta(self):
        records = [
            ExperimentRecord("x", 0, F(1, 5), Composition(2, 2, 0), 1.0, 0.1),
            ExperimentRecord("x", 0, F(1, 10), Composition(4, 2, 0), 0.5, 0.1),
        ]
        assert summarize_run(0, records).best_beta == F(1, 10)


class TestDependence:
    """Tests for votes over block-clique sources."""

    @pytest.fixture
    def config(self):
        return DependenceConfig(N=200, K=64, gamma="1/10", irrelevant=36, trials=4000, seed=3)

    def test_independent_point_matches_exact_error(self, config):
        (record,) = DependenceExperiment([0], config).run()
        assert record.n == 100
        assert record.exact_independent == pytest.approx(
            exact_error(Composition(100, 64, 0), F(1, 10))
        )
        assert abs(record.error - record.exact_independent) <= 4 * record.error_se
        assert record.error <= record.bound

    def test_dependence_raises_error(self, config):
        records = DependenceExperiment([0, 7], config).run()
        assert [r.r for r in records] == [0, 7]
        assert records[1].error > records[0].error + 0.1

    def test_error_grows_with_clique_size(self, config):
        records = DependenceExperiment([0, 1, 3, 7], config).run()
        errors = [r.error for r in records]
        assert errors == sorted(errors)
        assert all(b > a for a, b in zip(errors, errors[1:]))

    def test_bound_undefined_for_large_cliques(self, config):
        (record,) = DependenceExperiment([63], config).run()
        assert record.bound is None

    def test_function_form_matches_experiment(self, config):
        small = config.model_copy(update={"trials": 500})
        assert dependence_study([1], small) == DependenceExperiment([1], small).run()

    def test_rejects_negative_r(self, config):
        with pytest.raises(ParameterDomainError):
            DependenceExperiment([-1], config)


class TestIrrelevantCount:
    """Tests for the irrelevant-variable floor check."""

    def test_mean_clears_floor(self):
        config = sweep_config(
            source={"N": 2000, "K": 20, "gamma": "1/5"}, m=64, betas=["0"], replicates=3
        )
        report = IrrelevantCountExperiment(config, "1/16").run()
        assert report.beta == F(1, 16)
        assert report.replicates == 3
        assert report.floor == pytest.approx(1980 * 2.718281828459045**-4)
        assert report.mean_irrelevant > report.floor
        assert report.passed


class TestDominance:
    """Tests for replicate-mean error against the learning bounds."""

    def test_bounds_cover_mean_error(self):
        config = sweep_config(
            source={"N": 2000, "K": 500, "gamma": "1/5"},
            m=300,
            betas=["0", "1/10"],
            replicates=2,
        )
        results = DominanceExperiment(config).run()
        assert [r.beta for r in results] == [F(0), F(1, 10)]
        for result in results:
            assert result.replicates == 2
            assert result.t3_holds is True
            assert result.passed
        assert results[1].t2_bound < 1e-8
        assert results[1].t2_holds is True


class TestExclusivity:
    """Tests for inclusive against exclusive learners."""

    def test_inclusive_learner_wins_at_one_fifth(self):
        (report,) = ExclusivityExperiment([F(1, 5)], replicates=8, seed=2).run()
        assert report.params.K == 81
        assert report.replicates == 8
        assert report.error_inclusive < report.error_exclusive
        assert report.lambda_inclusive > report.lambda_exclusive
        assert report.q_exclusive == 1.0
        assert len(report.errors_inclusive) == 8

    def test_rejects_zero_replicates(self):
        with pytest.raises(ParameterDomainError):
            ExclusivityExperiment([F(1, 5)], replicates=0)


class TestRegistry:
    """Tests for experiment lookup."""

    def test_names(self):
        assert experiment_names() == [
            "dependence", "dominance", "exclusivity", "fig2", "irrelevant", "sweep",
        ]

    def test_lookup(self):
        assert get_experiment_class("sweep") is SweepExperiment
        assert issubclass(get_experiment_class("dominance"), BaseExperiment)

    def test_unknown_name(self):
        with pytest.raises(ParameterDomainError, match="Valid experiments"):
            get_experiment_class("nope")

    def test_create(self):
        experiment = create_experiment("sweep", sweep_config())
        assert experiment.name == "sweep"
