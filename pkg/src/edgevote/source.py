"""Generative source of labeled boolean examples and its seeded sampler.

A source has N variables. Relevant ones agree with a fair random label
with probability 1/2 + gamma_i (positive polarity) or 1/2 - gamma_i
(negative polarity); all others agree with probability exactly 1/2.
Relevant variables may be grouped into cliques that copy one latent
agreement bit, which gives each variable at most r dependent peers.

Sampling is counter-based: the uniform behind example i, variable j is
drawn from a Philox generator keyed by (seed, stream, i // ROW_TILE,
j // COL_TILE), so any subset of rows or columns can be regenerated
without the rest, in any order, on any number of workers.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .config import format_rational, parse_rational
from .constants import COL_TILE, LABEL_CHUNK, ROW_TILE, TRAIN_STREAM
from .errors import ParameterDomainError
from .parallel import run_blocking

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)

# Row blocks handled by one worker task during a draw
_BLOCKS_PER_TASK = 16


class Structure(str, Enum):
    """Dependence structure among relevant variables."""
    INDEPENDENT = "independent"
    BLOCK_CLIQUE = "block_clique"


@dataclass(frozen=True)
class SourceSpec:
    """Immutable description of a generative source.

    ``edges`` is aligned with ``relevant``; the sign of each edge is the
    variable's polarity and its magnitude is gamma_i.
    """
    N: int
    relevant: tuple[int, ...]
    edges: tuple[Fraction, ...]
    structure: Structure = Structure.INDEPENDENT
    block_size: int = 1

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ParameterDomainError(f"N must be positive, got {self.N}")
        if len(self.relevant) != len(self.edges):
            raise ParameterDomainError("relevant and edges must have the same length")
        if len(self.relevant) < 1:
            raise ParameterDomainError("a source needs at least one relevant variable")
        if list(self.relevant) != sorted(set(self.relevant)):
            raise ParameterDomainError("relevant indices must be unique and ascending")
        if self.relevant[0] < 0 or self.relevant[-1] >= self.N:
            raise ParameterDomainError(f"relevant indices must lie in [0, {self.N - 1}]")
        for edge in self.edges:
            if not 0 < abs(edge) < HALF:
                raise ParameterDomainError(f"edge magnitude must lie in (0, 1/2), got {edge}")
        if self.block_size < 1:
            raise ParameterDomainError(f"block_size must be positive, got {self.block_size}")
        if self.structure is Structure.BLOCK_CLIQUE:
            if len({abs(e) for e in self.edges}) != 1:
                raise ParameterDomainError("block-clique sources need a uniform edge")
        elif self.block_size != 1:
            raise ParameterDomainError("block_size applies to block-clique sources only")

    @property
    def K(self) -> int:
        return len(self.relevant)

    @property
    def r(self) -> int:
        """Dependence degree: peers each relevant variable may depend on."""
        return self.block_size - 1

    @property
    def label_prior(self) -> Fraction:
        return HALF

    @property
    def polarity(self) -> tuple[int, ...]:
        return tuple(1 if e > 0 else -1 for e in self.edges)

    @property
    def gamma_min(self) -> Fraction:
        return min(abs(e) for e in self.edges)

    @property
    def gamma_max(self) -> Fraction:
        return max(abs(e) for e in self.edges)

    @cached_property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        """Consecutive groups of block_size relevant variables (last may be short)."""
        rel = self.relevant
        return tuple(rel[i:i + self.block_size] for i in range(0, len(rel), self.block_size))

    @cached_property
    def edge_of(self) -> dict[int, Fraction]:
        return dict(zip(self.relevant, self.edges))

    @cached_property
    def agreement_probs(self) -> np.ndarray:
        """Per-variable probability of agreeing with the label."""
        probs = np.full(self.N, 0.5)
        for index, edge in zip(self.relevant, self.edges):
            probs[index] = float(HALF + edge)
        probs.setflags(write=False)
        return probs

    @cached_property
    def _plan(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per variable: uniform column to read, agreement threshold, polarity flip.

        A variable agrees with the label iff (u[leader] < threshold) xor flip.
        """
        leaders = np.arange(self.N, dtype=np.int64)
        thresholds = np.full(self.N, 0.5)
        flips = np.zeros(self.N, dtype=bool)
        for index, edge in zip(self.relevant, self.edges):
            thresholds[index] = float(HALF + abs(edge))
            flips[index] = edge < 0
        if self.structure is Structure.BLOCK_CLIQUE:
            for block in self.blocks:
                leaders[list(block)] = block[0]
        return leaders, thresholds, flips

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form."""
        payload = json.dumps(
            {
                "N": self.N,
                "relevant": list(self.relevant),
                "edges": [format_rational(e) for e in self.edges],
                "structure": self.structure.value,
                "block_size": self.block_size,
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# =============================================================================
# Spec construction
# =============================================================================

def _polarities(K: int, plan: str | Sequence[int]) -> list[int]:
    if isinstance(plan, str):
        if plan == "all_positive":
            return [1] * K
        if plan == "half_half":
            positive = math.ceil(K / 2)
            return [1] * positive + [-1] * (K - positive)
        raise ParameterDomainError(f"Unknown polarity plan: {plan}")
    signs = list(plan)
    if len(signs) != K or any(s not in (1, -1) for s in signs):
        raise ParameterDomainError(f"explicit polarity must be {K} entries of +1/-1")
    return signs


def make_spec(
    N: int,
    K: int,
    gamma,
    polarity_plan: str | Sequence[int] = "all_positive",
    structure: Structure | str = Structure.INDEPENDENT,
    r: int = 0,
) -> SourceSpec:
    """Build a uniform-edge source.

    Relevant variables are 0..K-1; the lowest indices get positive
    polarity. With ``BLOCK_CLIQUE`` they are split into consecutive
    cliques of r + 1 variables.

    Raises:
        ParameterDomainError: If K is not in [1, N] or gamma not in (0, 1/2).
    """
    gamma = parse_rational(gamma)
    structure = Structure(structure)
    if not 1 <= K <= N:
        raise ParameterDomainError(f"need 1 <= K <= N, got K={K}, N={N}")
    if not 0 < gamma < HALF:
        raise ParameterDomainError(f"gamma must lie in (0, 1/2), got {gamma}")
    if r < 0:
        raise ParameterDomainError(f"r must be non-negative, got {r}")
    if structure is Structure.INDEPENDENT and r != 0:
        raise ParameterDomainError("r > 0 needs a block-clique structure")

    signs = _polarities(K, polarity_plan)
    return SourceSpec(
        N=N,
        relevant=tuple(range(K)),
        edges=tuple(s * gamma for s in signs),
        structure=structure,
        block_size=r + 1,
    )


def make_hetero_spec(
    N: int,
    K: int,
    gamma_min,
    gamma_max,
    edge_assignment: str | Sequence = "grid",
    polarity: str | Sequence[int] = "all_positive",
) -> SourceSpec:
    """Build an independent source whose edges lie in [gamma_min, gamma_max].

    ``edge_assignment`` is ``"grid"`` (K evenly spaced exact rationals
    from gamma_min to gamma_max) or an explicit list of K edges.

    Raises:
        ParameterDomainError: If the interval is invalid or an explicit
            edge falls outside it.
    """
    lo, hi = parse_rational(gamma_min), parse_rational(gamma_max)
    if not 0 < lo <= hi < HALF:
        raise ParameterDomainError(f"need 0 < gamma_min <= gamma_max < 1/2, got [{lo}, {hi}]")
    if not 1 <= K <= N:
        raise ParameterDomainError(f"need 1 <= K <= N, got K={K}, N={N}")

    if isinstance(edge_assignment, str):
        if edge_assignment != "grid":
            raise ParameterDomainError(f"Unknown edge assignment: {edge_assignment}")
        if K == 1:
            magnitudes = [lo]
        else:
            magnitudes = [lo + (hi - lo) * i / (K - 1) for i in range(K)]
    else:
        magnitudes = [parse_rational(g) for g in edge_assignment]
        if len(magnitudes) != K:
            raise ParameterDomainError(f"expected {K} explicit edges, got {len(magnitudes)}")
        if any(not lo <= g <= hi for g in magnitudes):
            raise ParameterDomainError("explicit edges must lie inside [gamma_min, gamma_max]")

    signs = _polarities(K, polarity)
    return SourceSpec(
        N=N,
        relevant=tuple(range(K)),
        edges=tuple(s * g for s, g in zip(signs, magnitudes)),
    )


# =============================================================================
# Sampling
# =============================================================================

@dataclass(frozen=True, eq=False)
class Dataset:
    """m labeled examples over N boolean variables (read-only arrays).

    ``K`` is the relevant-variable count of the drawing source, when known.
    """
    labels: np.ndarray
    values: np.ndarray
    seed: int
    spec_fingerprint: str
    stream: int = TRAIN_STREAM
    K: int | None = None

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.labels.shape != (self.values.shape[0],):
            raise ParameterDomainError("labels and values dimensions disagree")
        self.labels.setflags(write=False)
        self.values.setflags(write=False)

    @property
    def m(self) -> int:
        return int(self.values.shape[0])

    @property
    def N(self) -> int:
        return int(self.values.shape[1])

    def same_as(self, other: Dataset) -> bool:
        """Bit-for-bit equality of contents and provenance."""
        return (
            self.seed == other.seed
            and self.spec_fingerprint == other.spec_fingerprint
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.values, other.values)
        )


def _tile_rng(seed: int, stream: int, row_block: int, col_chunk: int) -> np.random.Generator:
    entropy = [seed, stream, row_block, col_chunk]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _label_block(seed: int, stream: int, row_block: int) -> np.ndarray:
    return (_tile_rng(seed, stream, row_block, LABEL_CHUNK).random(ROW_TILE) < 0.5).astype(np.uint8)


def draw_columns(
    spec: SourceSpec,
    m: int,
    seed: int,
    columns: Sequence[int] | np.ndarray,
    stream: int = TRAIN_STREAM,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw labels and the requested variables only.

    The result equals the matching columns of ``draw_dataset`` with the
    same (spec, m, seed, stream).

    Returns:
        ``(labels, values)`` with shapes (m,) and (m, len(columns)).
    """
    if m < 1:
        raise ParameterDomainError(f"m must be positive, got {m}")
    if not 0 <= seed < 2**64:
        raise ParameterDomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    columns = np.asarray(columns, dtype=np.int64)
    if columns.size and (columns.min() < 0 or columns.max() >= spec.N):
        raise ParameterDomainError(f"column index out of range for N={spec.N}")

    leaders_all, thresholds_all, flips_all = spec._plan
    leaders = leaders_all[columns]
    thresholds = thresholds_all[columns]
    flips = flips_all[columns]
    chunk_of = leaders // COL_TILE
    groups = [(int(c), np.nonzero(chunk_of == c)[0]) for c in np.unique(chunk_of)]

    n_blocks = math.ceil(m / ROW_TILE)
    labels = np.empty(m, dtype=np.uint8)
    values = np.empty((m, columns.size), dtype=np.uint8)

    def fill(first_block: int, last_block: int) -> None:
        for block in range(first_block, last_block):
            r0 = block * ROW_TILE
            r1 = min(m, r0 + ROW_TILE)
            lab = _label_block(seed, stream, block)[: r1 - r0]
            labels[r0:r1] = lab
            lab = lab[:, None]
            for chunk, sel in groups:
                tile = _tile_rng(seed, stream, block, chunk).random((ROW_TILE, COL_TILE))
                u = tile[: r1 - r0, leaders[sel] - chunk * COL_TILE]
                agree = (u < thresholds[sel]) ^ flips[sel]
                values[r0:r1, sel] = np.where(agree, lab, 1 - lab)

    starts = range(0, n_blocks, _BLOCKS_PER_TASK)
    run_blocking(
        [lambda s=s: fill(s, min(s + _BLOCKS_PER_TASK, n_blocks)) for s in starts],
        label="draw",
    )
    return labels, values


def draw_dataset(spec: SourceSpec, m: int, seed: int, stream: int = TRAIN_STREAM) -> Dataset:
    """Draw m labeled examples from a source.

    Regenerating with the same (spec, m, seed, stream) is bit-identical,
    and the first m' rows of a draw equal a draw of size m'.
    """
    labels, values = draw_columns(spec, m, seed, np.arange(spec.N), stream)
    logger.debug("Drew %d x %d examples (seed=%d, stream=%d)", m, spec.N, seed, stream)
    return Dataset(labels, values, seed, spec.fingerprint(), stream, spec.K)
