"""Unweighted majority-vote models: prediction, exact error and error bounds."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .config import parse_rational
from .constants import MAX_HETERO_VOTERS, TEST_STREAM
from .errors import CapacityError, InputError, ParameterDomainError, PreconditionError
from .source import SourceSpec, draw_columns

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)

Feature = tuple[int, bool]
"""(variable index, negated)."""


# =============================================================================
# Models
# =============================================================================

def parse_feature(token: str | int) -> Feature:
    """Read ``"+3"``, ``"-0"`` or a non-negative int as a feature.

    Raises:
        InputError: If the token is not a signed index.
    """
    if isinstance(token, bool):
        raise InputError(f"Not a feature: {token!r}")
    if isinstance(token, int):
        if token < 0:
            return -token, True
        return token, False
    text = str(token).strip()
    negated = text.startswith("-")
    digits = text[1:] if text[:1] in "+-" else text
    if not digits.isdigit():
        raise InputError(f"Not a feature: {token!r}")
    return int(digits), negated


def format_feature(feature: Feature) -> str:
    index, negated = feature
    return f"{'-' if negated else '+'}{index}"


@dataclass(frozen=True)
class VoteModel:
    """Majority vote over signed features with a default label for ties.

    Features are kept sorted by variable; no variable appears twice.
    """
    features: tuple[Feature, ...] = ()
    default_label: int = 1

    def __post_init__(self) -> None:
        if self.default_label not in (0, 1):
            raise ParameterDomainError(f"default_label must be 0 or 1, got {self.default_label}")
        indices = [index for index, _ in self.features]
        if any(index < 0 for index in indices):
            raise ParameterDomainError("feature indices must be non-negative")
        if len(set(indices)) != len(indices):
            raise ParameterDomainError("a variable may appear only once in a model")
        object.__setattr__(self, "features", tuple(sorted(self.features)))

    @classmethod
    def from_features(cls, features: Iterable[Feature | str | int], default_label: int = 1) -> VoteModel:
        """Build a model, dropping duplicates and canceling variable/negation pairs."""
        signs: dict[int, set[bool]] = {}
        for token in features:
            index, negated = token if isinstance(token, tuple) else parse_feature(token)
            signs.setdefault(index, set()).add(negated)
        kept = tuple((index, next(iter(s))) for index, s in signs.items() if len(s) == 1)
        return cls(kept, default_label)

    @property
    def n(self) -> int:
        return len(self.features)

    @property
    def variables(self) -> np.ndarray:
        return np.array([index for index, _ in self.features], dtype=np.int64)

    @property
    def negated(self) -> np.ndarray:
        return np.array([neg for _, neg in self.features], dtype=bool)

    def to_dict(self) -> dict:
        return {
            "features": [format_feature(f) for f in self.features],
            "default_label": self.default_label,
        }

    @classmethod
    def from_dict(cls, data: dict) -> VoteModel:
        """Inverse of to_dict.

        Raises:
            InputError: If the document is malformed.
        """
        try:
            return cls.from_features(data["features"], int(data.get("default_label", 1)))
        except (KeyError, TypeError, AttributeError) as e:
            raise InputError(f"Malformed model document: {e}") from e


def _decide(ones: np.ndarray, n: int, default_label: int) -> np.ndarray:
    twice = 2 * ones
    return np.where(twice > n, 1, np.where(twice < n, 0, default_label)).astype(np.uint8)


def predict(model: VoteModel, example: Sequence[int] | np.ndarray) -> int:
    """Majority vote on one example; ties and empty models give the default label.

    Raises:
        InputError: If the example is shorter than the largest referenced index.
    """
    x = np.asarray(example, dtype=np.uint8)
    if model.n and x.shape[0] <= int(model.variables.max()):
        raise InputError(
            f"example has {x.shape[0]} variables, model references {int(model.variables.max())}"
        )
    if not model.n:
        return model.default_label
    ones = int(np.count_nonzero(x[model.variables] ^ model.negated))
    return int(_decide(np.array([ones]), model.n, model.default_label)[0])


def predict_batch(model: VoteModel, values: np.ndarray) -> np.ndarray:
    """Vectorized predict over an (m, N) matrix."""
    values = np.asarray(values, dtype=np.uint8)
    m = values.shape[0]
    if not model.n:
        return np.full(m, model.default_label, dtype=np.uint8)
    if values.shape[1] <= int(model.variables.max()):
        raise InputError(
            f"examples have {values.shape[1]} variables, model references {int(model.variables.max())}"
        )
    votes = values[:, model.variables] ^ model.negated.astype(np.uint8)
    ones = votes.sum(axis=1, dtype=np.int64)
    return _decide(ones, model.n, model.default_label)


# =============================================================================
# Composition
# =============================================================================

@dataclass(frozen=True)
class Composition:
    """Feature counts of a model: n total, k relevant, l misleading."""
    n: int
    k: int
    l: int  # noqa: E741

    def __post_init__(self) -> None:
        if min(self.n, self.k, self.l) < 0:
            raise ParameterDomainError("composition counts must be non-negative")
        if self.k + self.l > self.n:
            raise ParameterDomainError(f"k + l = {self.k + self.l} exceeds n = {self.n}")

    @property
    def irrelevant(self) -> int:
        return self.n - self.k - self.l


@dataclass(frozen=True)
class CompositionReport:
    """Composition of a model against a source, with its relevant fractions.

    ``exclusivity`` counts every feature whose variable is relevant,
    misleading ones included; both fractions are None for an empty model.
    """
    composition: Composition
    exclusivity: float | None
    relevant_fraction: float | None

    @property
    def irrelevant_fraction(self) -> float | None:
        if self.exclusivity is None:
            return None
        return 1.0 - self.exclusivity


def composition_of(model: VoteModel, spec: SourceSpec) -> CompositionReport:
    """Count relevant, misleading and irrelevant features of a model."""
    if model.n and int(model.variables.max()) >= spec.N:
        raise InputError(f"model references variable outside N={spec.N}")
    k = misleading = 0
    for index, negated in model.features:
        edge = spec.edge_of.get(index)
        if edge is None:
            continue
        if (edge > 0) != negated:
            k += 1
        else:
            misleading += 1
    comp = Composition(model.n, k, misleading)
    if not model.n:
        return CompositionReport(comp, None, None)
    return CompositionReport(comp, (k + misleading) / model.n, k / model.n)


def mostly_irrelevant_point(n: int) -> Composition:
    """Composition with k = 2 n^(2/3) and l = n^(2/3), rounded.

    For constant gamma such models grow more accurate as n increases while
    their irrelevant fraction tends to one.
    """
    third = round(n ** (2 / 3))
    return Composition(n, 2 * third, third)


# =============================================================================
# Exact error
# =============================================================================

def _check_gamma(gamma) -> Fraction:
    gamma = parse_rational(gamma)
    if not 0 < gamma < HALF:
        raise ParameterDomainError(f"gamma must lie in (0, 1/2), got {gamma}")
    return gamma


def _binom_pmf(size: int, p: float) -> np.ndarray:
    return stats.binom.pmf(np.arange(size + 1), size, p)


def _error_from_groups(groups: list[tuple[int, float]], n: int) -> float:
    """P(correct < n/2) + P(correct = n/2)/2 for a sum of binomial groups.

    All groups but the largest are convolved into one dense pmf; the
    largest is folded in through its cdf.
    """
    groups = sorted((g for g in groups if g[0] > 0), key=lambda g: g[0])
    big_size, big_p = groups.pop()
    small = np.ones(1)
    for size, p in groups:
        small = np.convolve(small, _binom_pmf(size, p))

    j = np.arange(small.size)
    # 2 (j + L) < n  <=>  L <= floor((n - 2j - 1) / 2)
    below = stats.binom.cdf((n - 2 * j - 1) // 2, big_size, big_p)
    terms = small * below
    if n % 2 == 0:
        tie = stats.binom.pmf(n // 2 - j, big_size, big_p)
        terms = terms + 0.5 * small * tie
    return min(1.0, max(0.0, math.fsum(terms)))


def exact_error(comp: Composition, gamma) -> float:
    """Exact test error of a vote with k relevant, l misleading features.

    Relevant features agree with the label w.p. 1/2 + gamma, misleading
    ones w.p. 1/2 - gamma, the rest w.p. 1/2. A tie costs 1/2 because the
    default label is wrong for exactly one of the two equally likely labels.

    Raises:
        ParameterDomainError: If n < 1 or gamma is outside (0, 1/2).
    """
    gamma = _check_gamma(gamma)
    if comp.n < 1:
        raise ParameterDomainError("exact_error needs at least one feature")
    if comp.k == comp.l:
        return 0.5
    p = float(HALF + gamma)
    return _error_from_groups(
        [(comp.k, p), (comp.l, float(HALF - gamma)), (comp.irrelevant, 0.5)], comp.n
    )


def exact_error_hetero(probs: Sequence) -> float:
    """Exact error of a vote whose features agree with individual probabilities.

    Features sharing a probability are grouped into one binomial before
    the Poisson-binomial convolution.

    Raises:
        ParameterDomainError: If the sequence is empty or a probability is
            outside (0, 1).
        CapacityError: If more than MAX_HETERO_VOTERS voters need convolving.
    """
    if len(probs) == 0:
        raise ParameterDomainError("exact_error_hetero needs at least one feature")
    exact = [parse_rational(p) for p in probs]
    if any(not 0 < p < 1 for p in exact):
        raise ParameterDomainError("agreement probabilities must lie in (0, 1)")

    counts = Counter(exact)
    groups = [(size, float(p)) for p, size in counts.items()]
    convolved = len(exact) - max(counts.values())
    if convolved > MAX_HETERO_VOTERS:
        raise CapacityError(
            f"{convolved} voters to convolve exceeds the limit of {MAX_HETERO_VOTERS}"
        )
    return _error_from_groups(groups, len(exact))


# =============================================================================
# Closed-form bounds
# =============================================================================

def theorem1_bound(comp: Composition, gamma) -> float:
    """exp(-2 gamma^2 [k - l]_+^2 / n); 1 when k <= l."""
    gamma = _check_gamma(gamma)
    if comp.n < 1:
        raise ParameterDomainError("bound needs at least one feature")
    excess = max(comp.k - comp.l, 0)
    return math.exp(-2 * float(gamma) ** 2 * excess * excess / comp.n)


def hetero_bound(n: int, k: int, l: int, gamma_min, gamma_max) -> float:  # noqa: E741
    """exp(-2 [gamma_min k - gamma_max l]_+^2 / n) for edges in an interval."""
    lo, hi = parse_rational(gamma_min), parse_rational(gamma_max)
    if not 0 < lo <= hi < HALF:
        raise ParameterDomainError(f"need 0 < gamma_min <= gamma_max < 1/2, got [{lo}, {hi}]")
    Composition(n, k, l)
    if n < 1:
        raise ParameterDomainError("bound needs at least one feature")
    excess = max(float(lo * k - hi * l), 0.0)
    return math.exp(-2 * excess * excess / n)


def dependence_bound(n: int, k: int, r: int, gamma, c: float = 1.0) -> float:
    """c (r+1) exp(-2 gamma^2 k^2 / (n (r+1))), capped at 1.

    Raises:
        PreconditionError: If r < 0 or r > n/2.
    """
    gamma = _check_gamma(gamma)
    if r < 0 or 2 * r > n:
        raise PreconditionError("dependence_bound", "0 <= r <= n/2", f"r={r}, n={n}")
    if k < 0 or k > n:
        raise ParameterDomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    value = c * (r + 1) * math.exp(-2 * float(gamma) ** 2 * k * k / (n * (r + 1)))
    return min(1.0, value)


# =============================================================================
# Monte Carlo error
# =============================================================================

def mc_error(model: VoteModel, spec: SourceSpec, trials: int, seed: int) -> tuple[float, float]:
    """Misclassification rate on freshly drawn test examples.

    Only the model's variables are drawn, on the test stream, so the
    estimate does not depend on N or on how the draw is partitioned.

    Returns:
        ``(estimate, standard_error)`` with SE = sqrt(e (1 - e) / trials).
    """
    if trials < 1:
        raise ParameterDomainError(f"trials must be positive, got {trials}")
    if model.n and int(model.variables.max()) >= spec.N:
        raise InputError(f"model references variable outside N={spec.N}")

    columns = model.variables
    labels, values = draw_columns(spec, trials, seed, columns, stream=TEST_STREAM)
    local = VoteModel(tuple((i, neg) for i, (_, neg) in enumerate(model.features)), model.default_label)
    wrong = int(np.count_nonzero(predict_batch(local, values) != labels))

    estimate = wrong / trials
    se = math.sqrt(estimate * (1 - estimate) / trials)
    logger.debug("mc_error: %d/%d wrong (n=%d)", wrong, trials, model.n)
    return estimate, se
