"""Tests for vote models, exact errors and closed-form bounds."""

import math
from fractions import Fraction

import numpy as np
import pytest

from edgevote.errors import CapacityError, InputError, ParameterDomainError, PreconditionError
from edgevote.source import make_spec
from edgevote.vote import (
    Composition,
    VoteModel,
    composition_of,
    dependence_bound,
    exact_error,
    exact_error_hetero,
    format_feature,
    hetero_bound,
    mc_error,
    mostly_irrelevant_point,
    parse_feature,
    predict,
    predict_batch,
    theorem1_bound,
)

F = Fraction


def brute_force_error(probs):
    """Error of a default-1 vote by enumerating every agreement pattern."""
    n = len(probs)
    patterns = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    p = np.asarray([float(x) for x in probs])
    weights = np.prod(np.where(patterns == 1, p, 1 - p), axis=1)
    correct = patterns.sum(axis=1)
    return math.fsum(weights[2 * correct < n]) + math.fsum(weights[2 * correct == n]) / 2


class TestFeatures:
    """Tests for feature tokens and model construction."""

    def test_parse_tokens(self):
        assert parse_feature("+3") == (3, False)
        assert parse_feature("-0") == (0, True)
        assert parse_feature("7") == (7, False)
        assert parse_feature(-4) == (4, True)

    @pytest.mark.parametrize("token", ["x1", "+", "", "--2", True])
    def test_parse_rejects_garbage(self, token):
        with pytest.raises(InputError):
            parse_feature(token)

    def test_format(self):
        assert format_feature((2, True)) == "-2"
        assert format_feature((0, False)) == "+0"

    def test_features_are_sorted(self):
        model = VoteModel(((5, False), (1, True)))
        assert model.features == ((1, True), (5, False))
        assert model.variables.tolist() == [1, 5]
        assert model.negated.tolist() == [True, False]

    def test_duplicate_variable_rejected(self):
        with pytest.raises(ParameterDomainError):
            VoteModel(((1, False), (1, True)))

    def test_from_features_cancels_opposite_pairs(self):
        model = VoteModel.from_features(["+1", "-1", "+0", "+0", "-3"])
        assert model.features == ((0, False), (3, True))

    def test_bad_default_label(self):
        with pytest.raises(ParameterDomainError):
            VoteModel((), default_label=2)

    def test_dict_form(self):
        model = VoteModel.from_features(["-2", "+0"], default_label=0)
        data = model.to_dict()
        assert data == {"features": ["+0", "-2"], "default_label": 0}
        assert VoteModel.from_dict(data) == model

    def test_malformed_dict(self):
        with pytest.raises(InputError):
            VoteModel.from_dict({"default_label": 1})


class TestPredict:
    """Tests for majority voting."""

    def test_majority_and_ties(self):
        model = VoteModel.from_features(["+0", "-1"])
        assert predict(model, [1, 0]) == 1
        assert predict(model, [0, 1]) == 0
        assert predict(model, [1, 1]) == 1  # tie

    def test_tie_uses_default_label(self):
        model = VoteModel.from_features(["+0", "-1"], default_label=0)
        assert predict(model, [1, 1]) == 0

    def test_empty_model_gives_default(self):
        assert predict(VoteModel(), [0, 0, 0]) == 1
        assert predict_batch(VoteModel(default_label=0), np.zeros((4, 2))).tolist() == [0] * 4

    def test_short_example_rejected(self):
        with pytest.raises(InputError):
            predict(VoteModel.from_features(["+5"]), [1, 1, 1])

    def test_batch_matches_single(self):
        rng = np.random.default_rng(0)
        values = rng.integers(0, 2, size=(50, 6), dtype=np.uint8)
        model = VoteModel.from_features(["+0", "-2", "+3", "-5"])
        batch = predict_batch(model, values)
        assert batch.tolist() == [predict(model, row) for row in values]


class TestComposition:
    """Tests for model composition against a source."""

    def test_counts_and_fractions(self):
        spec = make_spec(10, 4, F(1, 5), "half_half")
        model = VoteModel.from_features(["+0", "-2", "+3", "+5"])
        report = composition_of(model, spec)
        assert report.composition == Composition(4, 2, 1)
        assert report.composition.irrelevant == 1
        assert report.exclusivity == pytest.approx(0.75)
        assert report.relevant_fraction == pytest.approx(0.5)
        assert report.irrelevant_fraction == pytest.approx(0.25)

    def test_empty_model_has_no_fractions(self, small_spec):
        report = composition_of(VoteModel(), small_spec)
        assert report.exclusivity is None
        assert report.irrelevant_fraction is None

    def test_variable_outside_source(self, small_spec):
        with pytest.raises(InputError):
            composition_of(VoteModel.from_features(["+40"]), small_spec)

    def test_invalid_counts(self):
        with pytest.raises(ParameterDomainError):
            Composition(3, 2, 2)

    def test_mostly_irrelevant_point(self):
        assert mostly_irrelevant_point(1000) == Composition(1000, 200, 100)


class TestExactError:
    """Tests for exact vote error."""

    def test_three_relevant_voters(self):
        assert exact_error(Composition(3, 3, 0), F(1, 5)) == pytest.approx(0.216, abs=1e-12)

    def test_one_relevant_one_irrelevant(self):
        assert exact_error(Composition(2, 1, 0), F(1, 5)) == pytest.approx(0.4, abs=1e-12)

    def test_balanced_relevant_and_misleading_is_chance(self):
        assert exact_error(Composition(7, 2, 2), F(1, 10)) == 0.5
        assert exact_error(Composition(5, 0, 0), F(1, 10)) == 0.5

    @pytest.mark.parametrize("gamma", [F(1, 10), F(1, 4)])
    def test_every_small_composition_matches_enumeration(self, gamma):
        agree, mislead = F(1, 2) + gamma, F(1, 2) - gamma
        for n in range(1, 13):
            for k in range(n + 1):
                for l in range(n - k + 1):  # noqa: E741
                    probs = [agree] * k + [mislead] * l + [F(1, 2)] * (n - k - l)
                    expected = brute_force_error(probs)
                    assert exact_error(Composition(n, k, l), gamma) == pytest.approx(
                        expected, abs=1e-12
                    ), (n, k, l)

    @pytest.mark.parametrize("gamma", [F(1, 10), F(1, 4)])
    @pytest.mark.parametrize(("n", "k", "l"), [(12, 7, 2), (60, 30, 10), (401, 200, 100)])
    def test_hetero_agrees_on_equal_edges(self, gamma, n, k, l):  # noqa: E741
        probs = [F(1, 2) + gamma] * k + [F(1, 2) - gamma] * l + [F(1, 2)] * (n - k - l)
        assert exact_error_hetero(probs) == pytest.approx(
            exact_error(Composition(n, k, l), gamma), abs=1e-10
        )

    def test_needs_a_feature(self):
        with pytest.raises(ParameterDomainError):
            exact_error(Composition(0, 0, 0), F(1, 10))

    def test_hetero_agrees_with_uniform(self):
        value = exact_error_hetero([0.7, 0.7, 0.7])
        assert value == pytest.approx(exact_error(Composition(3, 3, 0), F(1, 5)), abs=1e-12)

    def test_hetero_matches_enumeration(self):
        probs = [0.6, 0.7, 0.55, 0.5, 0.4, 0.8]
        assert exact_error_hetero(probs) == pytest.approx(brute_force_error(probs), abs=1e-12)

    def test_hetero_rejects_degenerate_probability(self):
        with pytest.raises(ParameterDomainError):
            exact_error_hetero([0.5, 1.0])
        with pytest.raises(ParameterDomainError):
            exact_error_hetero([])

    def test_hetero_capacity(self):
        probs = [F(1, 4) + F(i, 40_000) for i in range(5_002)]
        with pytest.raises(CapacityError):
            exact_error_hetero(probs)

    def test_large_vote_is_accurate(self):
        value = exact_error(Composition(10_000, 3_000, 1_000), F(1, 10))
        assert 0 < value < theorem1_bound(Composition(10_000, 3_000, 1_000), F(1, 10))


class TestBounds:
    """Tests for the closed-form error bounds."""

    def test_theorem1_value(self):
        value = theorem1_bound(Composition(100, 30, 10), F(1, 10))
        assert value == pytest.approx(math.exp(-2 * 0.01 * 400 / 100), rel=1e-12)

    def test_theorem1_vacuous_without_excess(self):
        assert theorem1_bound(Composition(10, 2, 3), F(1, 10)) == 1.0

    @pytest.mark.parametrize("gamma", [F(1, 20), F(1, 10), F(1, 4)])
    @pytest.mark.parametrize("n", [20, 100, 500, 2_000])
    def test_theorem1_dominates_exact_error(self, n, gamma):
        step = n // 20
        for k in range(0, n + 1, step):
            for l in range(0, n - k + 1, step):  # noqa: E741
                comp = Composition(n, k, l)
                assert exact_error(comp, gamma) <= theorem1_bound(comp, gamma) + 1e-12, (k, l)

    @pytest.mark.parametrize("n", [1_000, 8_000, 27_000, 64_000])
    def test_theorem1_at_mostly_irrelevant_point(self, n):
        comp = mostly_irrelevant_point(n)
        third = round(n ** (2 / 3))
        bound = theorem1_bound(comp, F(1, 4))
        assert bound == pytest.approx(math.exp(-third * third / (8 * n)), rel=1e-12)
        assert exact_error(comp, F(1, 4)) <= bound

    def test_mostly_irrelevant_models_improve_with_size(self):
        errors = [exact_error(mostly_irrelevant_point(n), F(1, 4)) for n in (1_000, 8_000, 27_000)]
        assert errors[0] > errors[1] > errors[2]
        assert mostly_irrelevant_point(27_000).irrelevant / 27_000 == pytest.approx(0.9)

    def test_hetero_bound_value(self):
        value = hetero_bound(10, 6, 2, F(1, 10), F(1, 5))
        assert value == pytest.approx(math.exp(-0.008), rel=1e-9)

    def test_hetero_bound_covers_grid_source(self):
        probs = [0.6, 0.65, 0.7, 0.6, 0.65, 0.7, 0.5, 0.5, 0.35]
        bound = hetero_bound(9, 6, 1, F(1, 10), F(1, 5))
        assert exact_error_hetero(probs) <= bound

    def test_hetero_bound_rejects_bad_interval(self):
        with pytest.raises(ParameterDomainError):
            hetero_bound(10, 5, 0, F(1, 5), F(1, 10))

    def test_dependence_bound_independent_case(self):
        value = dependence_bound(100, 50, 0, F(1, 10))
        assert value == pytest.approx(math.exp(-0.5), rel=1e-12)

    def test_dependence_bound_is_capped(self):
        assert dependence_bound(100, 50, 1, F(1, 10)) == 1.0

    def test_dependence_bound_rejects_large_r(self):
        with pytest.raises(PreconditionError):
            dependence_bound(100, 50, 51, F(1, 10))


class TestMonteCarlo:
    """Tests for sampled test error."""

    def test_estimate_matches_exact_error(self, small_spec):
        model = VoteModel.from_features([f"+{i}" for i in range(10)])
        estimate, se = mc_error(model, small_spec, trials=20_000, seed=3)
        exact = exact_error(Composition(10, 10, 0), F(1, 5))
        assert se > 0
        assert abs(estimate - exact) <= 4 * se

    def test_deterministic(self, small_spec):
        model = VoteModel.from_features(["+0", "+1", "+20"])
        assert mc_error(model, small_spec, 500, 9) == mc_error(model, small_spec, 500, 9)

    def test_rejects_variable_outside_source(self, small_spec):
        with pytest.raises(InputError):
            mc_error(VoteModel.from_features(["+40"]), small_spec, 100, 0)

    def test_rejects_zero_trials(self, small_spec):
        with pytest.raises(ParameterDomainError):
            mc_error(VoteModel(), small_spec, 0, 0)
