"""Closed-form learning bounds, lower-bound quantities and the relevance posterior.

The evaluators here drop every asymptotic (1 + o(1)) factor and return the
finite-sample expression itself. Where a result has an inner form with an
explicit confidence term, that form is returned alongside the headline one.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import softmax

from .config import parse_rational
from .constants import (
    MAX_AUDIT_SAMPLES,
    MAX_POSTERIOR_EXAMPLES,
    MAX_POSTERIOR_VARIABLES,
    POSTERIOR_TOLERANCE,
)
from .errors import CapacityError, ParameterDomainError, PreconditionError
from .parallel import run_blocking
from .vote import Composition, exact_error

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
LN32 = math.log(32)

# Count vectors scored per worker task in monotonicity_audit
_AUDIT_CHUNK = 4096


def _gamma(value, *, allow_zero: bool = False) -> Fraction:
    gamma = parse_rational(value)
    low_ok = gamma >= 0 if allow_zero else gamma > 0
    if not (low_ok and gamma < HALF):
        interval = "[0, 1/2)" if allow_zero else "(0, 1/2)"
        raise ParameterDomainError(f"gamma must lie in {interval}, got {gamma}")
    return gamma


def _sizes(N: int, K: int, m: int | None = None) -> None:
    if not 1 <= K <= N:
        raise ParameterDomainError(f"need 1 <= K <= N, got K={K}, N={N}")
    if m is not None and m < 1:
        raise ParameterDomainError(f"m must be positive, got {m}")


def _clamp(value: float) -> float:
    return min(1.0, value)


# =============================================================================
# Parameter regime
# =============================================================================

@dataclass(frozen=True)
class RegimeParams:
    """A (gamma, K, N, m) point where inclusive and exclusive learners separate."""
    gamma: Fraction
    K: int
    N: int
    m: int
    b: float
    beta_star: float


def nearest_odd(x: float) -> int:
    return 2 * round((x - 1) / 2) + 1


def regime_params(gamma) -> RegimeParams:
    """K, N and m grown from gamma, with the critical edge beta*.

    K = ceil(gamma^-2 exp(ln(1/gamma)^(1/3))), N = ceil(K exp(ln(1/gamma)^(1/4))),
    m is the odd integer nearest 2 ln 32 / gamma^2 and
    beta* = gamma ln(N/K) / (5b) with b = 2 ln 32.
    """
    gamma = _gamma(gamma)
    g = float(gamma)
    log_inv = math.log(1 / g)
    K = math.ceil(g**-2 * math.exp(log_inv ** (1 / 3)))
    N = math.ceil(K * math.exp(log_inv ** (1 / 4)))
    b = 2 * LN32
    m = nearest_odd(b / g**2)
    beta_star = g * math.log(N / K) / (5 * b)
    if not beta_star < g:
        logger.warning("regime_params: beta*=%g is not below gamma=%g", beta_star, g)
    return RegimeParams(gamma, K, N, m, b, beta_star)


# =============================================================================
# Upper bounds for the threshold learner
# =============================================================================

@dataclass(frozen=True)
class CountBounds:
    """High-confidence bounds on the feature counts of a threshold model.

    All three hold together with probability at least ``confidence``.
    """
    misleading_max: float
    irrelevant_max: float
    relevant_min: float
    confidence: float


def _check_beta_le(beta, ceiling: Fraction, name: str) -> Fraction:
    beta = parse_rational(beta)
    if not 0 <= beta <= ceiling:
        raise PreconditionError(name, f"0 <= beta <= {ceiling}", f"beta={beta}")
    return beta


def _check_delta(delta) -> float:
    delta = float(delta)
    if not 0 < delta <= 1:
        raise ParameterDomainError(f"delta must lie in (0, 1], got {delta}")
    return delta


def count_bounds(N: int, K: int, gamma, m: int, beta, delta) -> CountBounds:
    """Bounds on misleading, irrelevant and relevant features selected at beta."""
    gamma = _gamma(gamma)
    _sizes(N, K, m)
    beta = _check_beta_le(beta, gamma, "count_bounds")
    delta = _check_delta(delta)
    g, b = float(gamma), float(beta)
    log_term = math.log(1 / delta)
    return CountBounds(
        misleading_max=4 * K * math.exp(-2 * (g + b) ** 2 * m) + 3 * log_term,
        irrelevant_max=8 * N * math.exp(-2 * b * b * m) + 6 * log_term,
        relevant_min=K - 4 * K * math.exp(-2 * (g - b) ** 2 * m) - 3 * log_term,
        confidence=max(0.0, 1 - 4 * delta),
    )


def error_rate_lemma(N: int, K: int, gamma, m: int, beta, delta) -> float:
    """Error bound of the threshold learner for a free confidence delta.

    exp(-2 g^2 [K - 8K e^{-2(g-b)^2 m} - 6 ln(1/delta)]_+^2
        / (K + 8N e^{-2 b^2 m} + 6 ln(1/delta))) + 4 delta
    """
    gamma = _gamma(gamma)
    _sizes(N, K, m)
    beta = _check_beta_le(beta, gamma, "error_rate_lemma")
    delta = _check_delta(delta)
    g, b = float(gamma), float(beta)
    log_term = 6 * math.log(1 / delta)
    bracket = max(K - 8 * K * math.exp(-2 * (g - b) ** 2 * m) - log_term, 0.0)
    denom = K + 8 * N * math.exp(-2 * b * b * m) + log_term
    return _clamp(math.exp(-2 * g * g * bracket * bracket / denom) + 4 * delta)


@dataclass(frozen=True)
class Theorem2Result:
    """Headline bound plus its inner form at delta = exp(-gamma K / 6)."""
    bound: float
    lemma_bound: float
    delta: float


def theorem2_bound(N: int, K: int, gamma, m: int, beta) -> Theorem2Result:
    """Expected-error bound for the threshold learner, for 0 <= beta <= gamma.

    exp(-2 g^2 K [1 - 8 e^{-2(g-b)^2 m} - g]_+^2 / (1 + 8 (N/K) e^{-2 b^2 m} + g))

    Raises:
        PreconditionError: If beta is outside [0, gamma].
    """
    gamma = _gamma(gamma)
    _sizes(N, K, m)
    beta = _check_beta_le(beta, gamma, "theorem2_bound")
    g, b = float(gamma), float(beta)
    bracket = max(1 - 8 * math.exp(-2 * (g - b) ** 2 * m) - g, 0.0)
    denom = 1 + 8 * (N / K) * math.exp(-2 * b * b * m) + g
    bound = _clamp(math.exp(-2 * g * g * K * bracket * bracket / denom))

    delta = math.exp(-g * K / 6)
    lemma = error_rate_lemma(N, K, gamma, m, beta, delta)
    return Theorem2Result(bound, lemma, delta)


def theorem2_hetero_bound(N: int, K: int, gamma_min, gamma_max, m: int, beta) -> float:
    """Threshold-learner bound when relevant edges lie in [gamma_min, gamma_max].

    The factor 8 on the missed-relevant term becomes 4 (1 + gamma_max / gamma_min)
    and gamma_min stands in for gamma everywhere else.
    """
    lo, hi = _gamma(gamma_min), _gamma(gamma_max)
    if lo > hi:
        raise ParameterDomainError(f"gamma_min={lo} exceeds gamma_max={hi}")
    _sizes(N, K, m)
    beta = _check_beta_le(beta, lo, "theorem2_hetero_bound")
    g, b = float(lo), float(beta)
    spread = 4 * (1 + float(hi / lo))
    bracket = max(1 - spread * math.exp(-2 * (g - b) ** 2 * m) - g, 0.0)
    denom = 1 + 8 * (N / K) * math.exp(-2 * b * b * m) + g
    return _clamp(math.exp(-2 * g * g * K * bracket * bracket / denom))


@dataclass(frozen=True)
class Theorem3Result:
    """Bound in terms of gamma, K and N once m clears ``m_threshold``.

    ``sharp`` is the large-m form and only holds asymptotically.
    ``proof_form`` is the inner expression with its confidence term and is
    valid at every m.
    """
    bound: float
    m_threshold: float
    applicable: bool
    sharp: float
    proof_form: float | None = field(default=None)


def theorem3_bound(N: int, K: int, gamma, m: int, c_frac) -> Theorem3Result:
    """exp(-gamma^2 K^2 / N), valid for m >= ln 32 / (2 (1 - c)^2 gamma^2).

    Raises:
        PreconditionError: If c_frac is outside [0, 1).
    """
    gamma = _gamma(gamma)
    _sizes(N, K, m)
    c = parse_rational(c_frac)
    if not 0 <= c < 1:
        raise PreconditionError("theorem3_bound", "0 <= c_frac < 1", f"c_frac={c}")
    g = float(gamma)
    ratio = K * K / N
    m_threshold = LN32 / (2 * float(1 - c) ** 2 * g * g)

    b = float(c * gamma)
    delta = math.exp(-g * K / 6)
    bracket = max(1 - 2 * (4 * math.exp(-2 * (g - b) ** 2 * m) + g), 0.0)
    proof_form = _clamp(math.exp(-2 * g * g * ratio * bracket * bracket) + 2 * delta)

    return Theorem3Result(
        bound=math.exp(-g * g * ratio),
        m_threshold=m_threshold,
        applicable=m >= m_threshold,
        sharp=math.exp(-2 * g * g * ratio),
        proof_form=proof_form,
    )


def bayes_error_and_bound(K: int, gamma) -> tuple[float, float]:
    """Exact error of the vote over all K relevant variables, and exp(-2 gamma^2 K)."""
    if K < 1:
        raise ParameterDomainError(f"K must be positive, got {K}")
    gamma = _gamma(gamma)
    exact = exact_error(Composition(K, K, 0), gamma)
    return exact, math.exp(-2 * float(gamma) ** 2 * K)


# =============================================================================
# Lower-bound quantities
# =============================================================================

def relevant_floor(k: int, gamma) -> float:
    """(1/4) exp(-5 gamma^2 k): no classifier over k relevant variables does better.

    Raises:
        PreconditionError: If gamma is outside [0, 1/5].
    """
    gamma = parse_rational(gamma)
    if not 0 <= gamma <= Fraction(1, 5):
        raise PreconditionError("relevant_floor", "0 <= gamma <= 1/5", f"gamma={gamma}")
    if k < 0:
        raise ParameterDomainError(f"k must be non-negative, got {k}")
    return 0.25 * math.exp(-5 * float(gamma) ** 2 * k)


def expected_irrelevant_floor(N: int, K: int, beta, m: int) -> float:
    """(N - K) exp(-16 beta^2 m): expected irrelevant variables selected at beta.

    Raises:
        PreconditionError: If beta is outside [0, 1/8].
    """
    _sizes(N, K, m)
    beta = _check_beta_le(beta, Fraction(1, 8), "expected_irrelevant_floor")
    if (beta * m).denominator != 1:
        logger.debug("expected_irrelevant_floor: beta*m = %s is not an integer", beta * m)
    return (N - K) * math.exp(-16 * float(beta) ** 2 * m)


# =============================================================================
# Relevance posterior
# =============================================================================

def _log_weights(counts: np.ndarray, m: int, gamma: Fraction) -> np.ndarray:
    """Log-likelihood ratio of 'relevant' over 'irrelevant' per agreement count."""
    if gamma == 0:
        return np.zeros(counts.shape, dtype=np.float64)
    up = math.log1p(2 * float(gamma))
    down = math.log1p(-2 * float(gamma))
    return counts * up + (m - counts) * down


def _subset_mask(N: int, K: int) -> np.ndarray:
    combos = np.array(list(itertools.combinations(range(N), K)), dtype=np.int64)
    mask = np.zeros((combos.shape[0], N), dtype=np.float64)
    np.put_along_axis(mask, combos, 1.0, axis=1)
    return mask


def _posteriors(counts: np.ndarray, m: int, gamma: Fraction, mask: np.ndarray) -> np.ndarray:
    """Posterior relevance for each row of an (S, N) count matrix."""
    scores = _log_weights(counts, m, gamma) @ mask.T
    return softmax(scores, axis=1) @ mask


def posterior_all(labels, values, K: int, gamma) -> np.ndarray:
    """P(variable i relevant | sample) for every variable.

    The relevant set is uniform over size-K subsets and every relevant
    variable has positive polarity; the likelihood then depends on the
    sample only through per-variable agreement counts.

    Raises:
        CapacityError: If N or m exceeds the enumeration limits.
    """
    labels = np.asarray(labels, dtype=np.uint8)
    values = np.asarray(values, dtype=np.uint8)
    if values.ndim != 2 or labels.shape != (values.shape[0],):
        raise ParameterDomainError("labels and values dimensions disagree")
    m, N = values.shape
    if N > MAX_POSTERIOR_VARIABLES or m > MAX_POSTERIOR_EXAMPLES:
        raise CapacityError(
            f"posterior enumeration limited to N <= {MAX_POSTERIOR_VARIABLES}, "
            f"m <= {MAX_POSTERIOR_EXAMPLES}; got N={N}, m={m}"
        )
    _sizes(N, K, m)
    gamma = _gamma(gamma, allow_zero=True)

    counts = (values == labels[:, None]).sum(axis=0).astype(np.float64)
    return _posteriors(counts[None, :], m, gamma, _subset_mask(N, K))[0]


def posterior_relevance(labels, values, N: int, K: int, gamma, i: int) -> float:
    """P(variable i relevant | sample) by exact enumeration of relevant sets."""
    values = np.asarray(values)
    if values.ndim != 2 or values.shape[1] != N:
        raise ParameterDomainError(f"values must have N={N} columns")
    if not 0 <= i < N:
        raise ParameterDomainError(f"variable index {i} outside [0, {N})")
    return float(posterior_all(labels, values, K, gamma)[i])


@dataclass(frozen=True)
class MonotonicityReport:
    """Outcome of checking posterior order against edge order."""
    N: int
    K: int
    m: int
    gamma: Fraction
    samples_checked: int
    violations: list[tuple[tuple[int, ...], int, int]]
    min_strict_gap: float

    @property
    def passed(self) -> bool:
        return not self.violations


def monotonicity_audit(N: int, K: int, m: int, gamma) -> MonotonicityReport:
    """Check that posterior relevance orders variables exactly as their edges do.

    The posterior depends on a sample only through its agreement counts and
    every count vector in {0..m}^N is produced by some sample, so checking
    all count vectors covers all samples. Equal edges must give posteriors
    within POSTERIOR_TOLERANCE; larger edges must give strictly larger ones.

    Raises:
        CapacityError: If (m + 1)^N count vectors exceed MAX_AUDIT_SAMPLES.
    """
    _sizes(N, K, m)
    if K == N:
        raise ParameterDomainError("monotonicity is vacuous when every variable is relevant")
    gamma = _gamma(gamma)
    total = (m + 1) ** N
    if N > MAX_POSTERIOR_VARIABLES or total > MAX_AUDIT_SAMPLES:
        raise CapacityError(f"{total} count vectors exceed the limit of {MAX_AUDIT_SAMPLES}")

    mask = _subset_mask(N, K)
    grid = np.array(list(itertools.product(range(m + 1), repeat=N)), dtype=np.float64)
    pairs = [(a, b) for a in range(N) for b in range(N) if a != b]

    def check(start: int) -> tuple[list, float]:
        counts = grid[start : start + _AUDIT_CHUNK]
        post = _posteriors(counts, m, gamma, mask)
        found = []
        gap = math.inf
        for a, b in pairs:
            diff = post[:, a] - post[:, b]
            higher = counts[:, a] > counts[:, b]
            tied = counts[:, a] == counts[:, b]
            if higher.any():
                gap = min(gap, float(diff[higher].min()))
            bad = (higher & (diff <= POSTERIOR_TOLERANCE)) | (
                tied & (np.abs(diff) > POSTERIOR_TOLERANCE)
            )
            for row in np.nonzero(bad)[0]:
                found.append((tuple(int(c) for c in counts[row]), a, b))
        return found, gap

    results = run_blocking(
        [lambda s=s: check(s) for s in range(0, total, _AUDIT_CHUNK)],
        label="monotonicity",
    )
    violations = [v for found, _ in results for v in found]
    min_gap = min(gap for _, gap in results)
    logger.info(
        "monotonicity_audit N=%d K=%d m=%d gamma=%s: %d vectors, %d violations",
        N, K, m, gamma, total, len(violations),
    )
    return MonotonicityReport(N, K, m, gamma, total, violations, min_gap)
