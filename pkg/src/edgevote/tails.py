"""Exact binomial tails and the tail inequalities audited against them.

Every inequality is exposed as an evaluable function with its own
precondition. ``audit_bound`` walks a parameter grid and compares each
bound with the exact probability of the event it talks about.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np
from scipy import stats

from .config import AuditGrid, format_rational, parse_rational
from .constants import AUDIT_TOLERANCE, MAX_TAIL_TRIALS
from .errors import ParameterDomainError, PreconditionError
from .parallel import run_blocking

logger = logging.getLogger(__name__)

Real = Fraction | float | int

HALF = Fraction(1, 2)


# =============================================================================
# Queries and exact tails
# =============================================================================

@dataclass(frozen=True)
class TailQuery:
    """Tail event of U ~ Binomial(trials, success_prob).

    The event is ``U >= threshold``, or ``U > threshold`` when ``strict``.
    """
    trials: int
    success_prob: Fraction
    threshold: int
    strict: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ParameterDomainError(f"trials must be a positive integer, got {self.trials!r}")
        if self.trials > MAX_TAIL_TRIALS:
            raise ParameterDomainError(f"trials={self.trials} exceeds {MAX_TAIL_TRIALS}")
        p = parse_rational(self.success_prob)
        if not 0 < p < 1:
            raise ParameterDomainError(f"success_prob must lie in (0, 1), got {p}")
        object.__setattr__(self, "success_prob", p)
        if not 0 <= self.threshold <= self.trials + 1:
            raise ParameterDomainError(
                f"threshold must lie in [0, {self.trials + 1}], got {self.threshold}"
            )

    @classmethod
    def at_least(cls, trials: int, success_prob: Real, bound: Real) -> TailQuery:
        """Event ``U >= bound`` for a real bound (threshold = ceiling)."""
        threshold = min(max(math.ceil(bound), 0), trials + 1)
        return cls(trials, parse_rational(success_prob), threshold)

    @classmethod
    def exceeding(cls, trials: int, success_prob: Real, bound: Real) -> TailQuery:
        """Event ``U > bound`` for a real bound (first count = floor + 1)."""
        floor = math.floor(bound)
        if floor < 0:
            return cls(trials, parse_rational(success_prob), 0)
        return cls(trials, parse_rational(success_prob), min(floor, trials + 1), strict=True)

    @property
    def first_count(self) -> int:
        """Smallest count inside the event."""
        return self.threshold + 1 if self.strict else self.threshold


def _sum_pmf(trials: int, p: float, lo: int, hi: int) -> float:
    """Sum pmf terms for counts lo..hi, smallest terms first."""
    if lo > hi:
        return 0.0
    counts = np.arange(lo, hi + 1)
    terms = np.exp(np.sort(stats.binom.logpmf(counts, trials, p)))
    return min(1.0, math.fsum(terms))


def exact_upper_tail(q: TailQuery) -> float:
    """P(U >= t) (or P(U > t)) computed from log-space pmf terms.

    Terms are evaluated with scipy's log-pmf, exponentiated, sorted and
    summed with compensated summation.
    """
    lo = q.first_count
    if lo <= 0:
        return 1.0
    return _sum_pmf(q.trials, float(q.success_prob), lo, q.trials)


def exact_lower_complement(q: TailQuery) -> float:
    """P(U < first count), summed independently of the upper tail."""
    hi = min(q.first_count, q.trials + 1) - 1
    if hi >= q.trials:
        return 1.0
    return _sum_pmf(q.trials, float(q.success_prob), 0, hi)


# =============================================================================
# Bound registry
# =============================================================================

class BoundId(str, Enum):
    """Tail inequalities known to the oracle."""
    HOEFFDING_UPPER = "hoeffding_upper"
    CHERNOFF_UPPER = "chernoff_upper"
    CHERNOFF_ETA_LE4_UPPER = "chernoff_eta_le4_upper"
    FOUR_MEAN_UPPER = "four_mean_upper"
    BERRY_ESSEEN_LOWER = "berry_esseen_lower"
    FAIR_COIN_LOWER = "fair_coin_lower"
    SLUD_LOWER = "slud_lower"

    @property
    def is_upper(self) -> bool:
        return self.value.endswith("_upper")


@dataclass(frozen=True)
class BoundDefinition:
    """Formula, precondition and event of one inequality."""
    bound_id: BoundId
    formula: str
    event: str
    condition: str
    admits: Callable[..., bool]
    fixed_p: Fraction | None = None


def _as_frac(value: Real | None, name: str) -> Fraction:
    if value is None:
        raise ParameterDomainError(f"missing parameter: {name}")
    return parse_rational(value)


BOUNDS: dict[BoundId, BoundDefinition] = {
    BoundId.HOEFFDING_UPPER: BoundDefinition(
        BoundId.HOEFFDING_UPPER,
        formula="exp(-2 eta^2 ell)",
        event="U >= ell (p + eta)",
        condition="eta >= 0",
        admits=lambda eta, **_: eta >= 0,
    ),
    BoundId.CHERNOFF_UPPER: BoundDefinition(
        BoundId.CHERNOFF_UPPER,
        formula="exp(-(1+eta) E(U) ln((1+eta)/e))",
        event="U > (1 + eta) E(U)",
        condition="eta > 0",
        admits=lambda eta, **_: eta > 0,
    ),
    BoundId.CHERNOFF_ETA_LE4_UPPER: BoundDefinition(
        BoundId.CHERNOFF_ETA_LE4_UPPER,
        formula="exp(-eta^2 E(U) / 4)",
        event="U > (1 + eta) E(U)",
        condition="0 <= eta <= 4",
        admits=lambda eta, **_: 0 <= eta <= 4,
    ),
    BoundId.FOUR_MEAN_UPPER: BoundDefinition(
        BoundId.FOUR_MEAN_UPPER,
        formula="delta",
        event="U > 4 E(U) + 3 ln(1/delta)",
        condition="0 < delta <= 1",
        admits=lambda delta, **_: 0 < delta <= 1,
    ),
    BoundId.BERRY_ESSEEN_LOWER: BoundDefinition(
        BoundId.BERRY_ESSEEN_LOWER,
        formula="exp(-2 eta^2 ell) / (7 eta sqrt(ell)) - 1/sqrt(ell)",
        event="U >= ell (1/2 + eta), p = 1/2",
        condition="eta > 0 and ell >= 1/eta^2",
        admits=lambda eta, ell, **_: eta > 0 and ell * eta * eta >= 1,
        fixed_p=HALF,
    ),
    BoundId.FAIR_COIN_LOWER: BoundDefinition(
        BoundId.FAIR_COIN_LOWER,
        formula="exp(-16 eta^2 ell) / 5",
        event="U >= ell (1/2 + eta), p = 1/2",
        condition="0 <= eta <= 1/8 and eta*ell integer",
        admits=lambda eta, ell, **_: (
            0 <= eta <= Fraction(1, 8) and (eta * ell).denominator == 1
        ),
        fixed_p=HALF,
    ),
    BoundId.SLUD_LOWER: BoundDefinition(
        BoundId.SLUD_LOWER,
        formula="exp(-5 eta^2 ell) / 4",
        event="U <= ell/2, p = 1/2 + eta",
        condition="0 <= eta <= 1/5",
        admits=lambda eta, **_: 0 <= eta <= Fraction(1, 5),
    ),
}


def _require(bound_id: BoundId, **params) -> None:
    definition = BOUNDS[bound_id]
    if not definition.admits(**params):
        shown = ", ".join(f"{k}={v}" for k, v in params.items())
        raise PreconditionError(bound_id.value, definition.condition, shown)


def eval_upper_bound(
    bound_id: BoundId | str,
    *,
    ell: int | None = None,
    mean: Real | None = None,
    eta: Real | None = None,
    delta: Real | None = None,
) -> float | tuple[float, float]:
    """Evaluate an upper-tail inequality.

    Args:
        bound_id: One of the ``*_upper`` ids.
        ell: Trial count (Hoeffding).
        mean: E(U) (Chernoff forms and four_mean_upper).
        eta: Deviation parameter.
        delta: Confidence parameter (four_mean_upper).

    Returns:
        The bound value; for four_mean_upper the pair
        ``(threshold 4E(U) + 3 ln(1/delta), delta)``.

    Raises:
        PreconditionError: If the inequality's precondition fails.
    """
    bound_id = BoundId(bound_id)
    if not bound_id.is_upper:
        raise ParameterDomainError(f"{bound_id.value} is not an upper bound")

    if bound_id is BoundId.HOEFFDING_UPPER:
        eta_f = _as_frac(eta, "eta")
        if ell is None:
            raise ParameterDomainError("missing parameter: ell")
        _require(bound_id, eta=eta_f)
        return math.exp(-2 * float(eta_f) ** 2 * ell)

    if bound_id is BoundId.FOUR_MEAN_UPPER:
        delta_f = _as_frac(delta, "delta")
        mean_f = float(_as_frac(mean, "mean"))
        _require(bound_id, delta=delta_f)
        return 4 * mean_f + 3 * math.log(1 / float(delta_f)), float(delta_f)

    eta_f = _as_frac(eta, "eta")
    mean_f = float(_as_frac(mean, "mean"))
    _require(bound_id, eta=eta_f)
    x = float(eta_f)
    if bound_id is BoundId.CHERNOFF_UPPER:
        return math.exp(-(1 + x) * mean_f * (math.log1p(x) - 1))
    return math.exp(-x * x * mean_f / 4)


def eval_lower_bound(bound_id: BoundId | str, *, ell: int, eta: Real) -> float:
    """Evaluate a lower-tail inequality.

    Berry-Esseen values may be negative, which callers treat as vacuous.

    Raises:
        PreconditionError: If the inequality's precondition fails.
    """
    bound_id = BoundId(bound_id)
    if bound_id.is_upper:
        raise ParameterDomainError(f"{bound_id.value} is not a lower bound")
    eta_f = _as_frac(eta, "eta")
    _require(bound_id, eta=eta_f, ell=ell)
    x = float(eta_f)

    if bound_id is BoundId.BERRY_ESSEEN_LOWER:
        root = math.sqrt(ell)
        return math.exp(-2 * x * x * ell) / (7 * x * root) - 1 / root
    if bound_id is BoundId.FAIR_COIN_LOWER:
        return math.exp(-16 * x * x * ell) / 5
    return math.exp(-5 * x * x * ell) / 4


# =============================================================================
# Audits
# =============================================================================

@dataclass
class AuditRecord:
    """One grid point of an audit.

    For four_mean_upper the ``eta_nominal`` column carries delta.
    """
    bound_id: BoundId
    ell: int
    p: Fraction
    eta_nominal: Fraction
    eta_discrete: float | None
    threshold: int | None
    bound_value: float | None
    exact_tail: float | None
    margin: float | None
    status: str  # "ok", "violation", "skipped"

    def as_row(self) -> dict[str, str]:
        """CSV row with rationals as num/den and floats at full precision."""
        def num(value: float | None) -> str:
            return "" if value is None else repr(float(value))

        return {
            "bound_id": self.bound_id.value,
            "ell": str(self.ell),
            "p": format_rational(self.p),
            "eta_nominal": format_rational(self.eta_nominal),
            "eta_discrete": num(self.eta_discrete),
            "threshold": "" if self.threshold is None else str(self.threshold),
            "bound_value": num(self.bound_value),
            "exact_tail": num(self.exact_tail),
            "margin": num(self.margin),
            "status": self.status,
        }


@dataclass
class AuditReport:
    """Result of auditing one bound over a grid."""
    bound_id: BoundId
    grid: str
    records: list[AuditRecord] = field(default_factory=list)

    @property
    def violations(self) -> list[AuditRecord]:
        return [r for r in self.records if r.status == "violation"]

    @property
    def skipped(self) -> list[AuditRecord]:
        return [r for r in self.records if r.status == "skipped"]

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def max_relative_slack(self) -> float:
        """Largest margin relative to the larger of bound and exact tail."""
        slack = 0.0
        for r in self.records:
            if r.status == "skipped":
                continue
            scale = max(abs(r.bound_value), r.exact_tail)
            if scale > 0:
                slack = max(slack, r.margin / scale)
        return slack


def _matching_event(
    bound_id: BoundId, ell: int, p: Fraction, eta: Fraction
) -> tuple[TailQuery, float]:
    """Tail query a bound talks about, plus the realized (discretized) eta."""
    if bound_id is BoundId.HOEFFDING_UPPER:
        q = TailQuery.at_least(ell, p, ell * (p + eta))
        return q, q.first_count / ell - float(p)
    if bound_id in (BoundId.CHERNOFF_UPPER, BoundId.CHERNOFF_ETA_LE4_UPPER):
        mean = ell * p
        q = TailQuery.exceeding(ell, p, (1 + eta) * mean)
        return q, q.first_count / float(mean) - 1
    if bound_id is BoundId.FOUR_MEAN_UPPER:
        q = TailQuery.exceeding(ell, p, 4 * float(ell * p) + 3 * math.log(1 / float(eta)))
        return q, float(eta)
    if bound_id is BoundId.SLUD_LOWER:
        # U <= ell/2 for U ~ Bin(ell, 1/2 + eta) is B >= ell/2 for B ~ Bin(ell, 1/2 - eta)
        q = TailQuery.at_least(ell, HALF - eta, Fraction(ell, 2))
        return q, float(eta)
    q = TailQuery.at_least(ell, HALF, ell * (HALF + eta))
    return q, q.first_count / ell - 0.5


def _grid_points(bound_id: BoundId, grid: AuditGrid) -> Iterator[tuple[int, Fraction, Fraction]]:
    definition = BOUNDS[bound_id]
    if bound_id is BoundId.SLUD_LOWER:
        ps = [None]
    elif definition.fixed_p is not None:
        ps = [definition.fixed_p]
    else:
        ps = grid.ps

    for ell in grid.ells:
        if bound_id is BoundId.FOUR_MEAN_UPPER:
            params = grid.deltas
        elif grid.integer_steps:
            top = max(grid.etas, default=Fraction(0))
            params = [Fraction(j, ell) for j in range(0, math.floor(top * ell) + 1)]
        else:
            params = grid.etas
        for p in ps:
            for param in params:
                yield ell, (HALF + param if p is None else p), param


def audit_point(bound_id: BoundId, ell: int, p: Fraction, param: Fraction) -> AuditRecord:
    """Compare one bound value with the exact probability of its event."""
    definition = BOUNDS[bound_id]
    if bound_id is BoundId.FOUR_MEAN_UPPER:
        admissible = definition.admits(delta=param)
    else:
        admissible = definition.admits(eta=param, ell=ell)
    if bound_id is BoundId.SLUD_LOWER and not 0 < p < 1:
        admissible = False

    if not admissible:
        return AuditRecord(bound_id, ell, p, param, None, None, None, None, None, "skipped")

    q, eta_discrete = _matching_event(bound_id, ell, p, param)
    exact = exact_upper_tail(q)

    if bound_id is BoundId.HOEFFDING_UPPER:
        value = eval_upper_bound(bound_id, ell=ell, eta=param)
    elif bound_id is BoundId.FOUR_MEAN_UPPER:
        _, value = eval_upper_bound(bound_id, mean=ell * p, delta=param)
    elif bound_id.is_upper:
        value = eval_upper_bound(bound_id, mean=ell * p, eta=param)
    else:
        value = eval_lower_bound(bound_id, ell=ell, eta=param)

    margin = value - exact if bound_id.is_upper else exact - value
    status = "ok" if margin >= -AUDIT_TOLERANCE else "violation"
    if status == "violation":
        logger.warning(
            "%s violated at ell=%d p=%s param=%s: bound=%r exact=%r",
            bound_id.value, ell, p, param, value, exact,
        )
    return AuditRecord(
        bound_id, ell, p, param, eta_discrete, q.first_count, value, exact, margin, status
    )


def audit_bound(bound_id: BoundId | str, grid: AuditGrid) -> AuditReport:
    """Audit a bound on every point of a grid.

    Upper bounds must dominate the exact tail, lower bounds must not
    exceed it. Points outside the precondition are recorded as skipped.
    """
    bound_id = BoundId(bound_id)
    points = list(_grid_points(bound_id, grid))
    records = run_blocking(
        [lambda pt=pt: audit_point(bound_id, *pt) for pt in points],
        label=f"audit {bound_id.value}",
    )
    report = AuditReport(bound_id, grid.model_dump_json(), records)
    logger.info(
        "Audited %s: %d points, %d skipped, %d violations",
        bound_id.value, len(records), len(report.skipped), len(report.violations),
    )
    return report


_BASE_ELLS = list(range(4, 65)) + [100, 400]


def default_grid(bound_id: BoundId | str) -> AuditGrid:
    """Acceptance grid for a bound, chosen inside its precondition."""
    bound_id = BoundId(bound_id)
    f = Fraction
    if bound_id is BoundId.HOEFFDING_UPPER:
        return AuditGrid(
            ells=_BASE_ELLS,
            etas=[f(1, 20), f(1, 10), f(1, 5), f(3, 10)],
            ps=[f(1, 2), f(1, 10), f(3, 10)],
        )
    if bound_id in (BoundId.CHERNOFF_UPPER, BoundId.CHERNOFF_ETA_LE4_UPPER):
        return AuditGrid(
            ells=_BASE_ELLS,
            etas=[f(0), f(1, 10), f(1, 2), f(1), f(2), f(4)],
            ps=[f(1, 2), f(1, 10), f(3, 10)],
        )
    if bound_id is BoundId.FOUR_MEAN_UPPER:
        return AuditGrid(
            ells=_BASE_ELLS,
            deltas=[f(1, 100), f(1, 10), f(1, 2), f(1)],
            ps=[f(1, 2), f(1, 10), f(3, 10)],
        )
    if bound_id is BoundId.BERRY_ESSEEN_LOWER:
        return AuditGrid(
            ells=_BASE_ELLS + [10_000],
            etas=[f(1, 100), f(1, 50), f(1, 20), f(1, 10), f(1, 8), f(1, 5), f(1, 4), f(1, 2)],
        )
    if bound_id is BoundId.FAIR_COIN_LOWER:
        return AuditGrid(ells=_BASE_ELLS, etas=[f(1, 8)], integer_steps=True)
    return AuditGrid(
        ells=_BASE_ELLS + [200],
        etas=[f(0), f(1, 50), f(1, 20), f(1, 10), f(3, 20), f(1, 5)],
    )


def audit_all() -> list[AuditReport]:
    """Audit every bound on its default grid."""
    return [audit_bound(bound_id, default_grid(bound_id)) for bound_id in BoundId]
