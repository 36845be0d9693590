"""Application-wide constants for edgevote.

Centralizes tolerances, capacity limits, sampling geometry and the
thresholds used by the experiment harness.
"""

from fractions import Fraction

# =============================================================================
# Version Information
# =============================================================================

__version__ = "0.4.0"
"""edgevote package version."""

DATASET_FORMAT_VERSION = 1
"""Version written into dataset file headers.

Bump when the packed layout or header fields change; readers reject
unknown versions instead of guessing.
"""

DATASET_MAGIC = "EDGEVOTE-DATASET"
"""First line of every dataset file."""


# =============================================================================
# Numerical Tolerances
# =============================================================================

AUDIT_TOLERANCE = 1e-12
"""Absolute slack allowed when comparing a bound with an exact tail.

Some bounds are attained exactly at tiny ell (Slud at ell=2, eta=0 gives
1/4 on both sides), so the audit compares with an absolute tolerance
rather than strictly.
"""

POSTERIOR_TOLERANCE = 1e-10
"""Two posteriors closer than this are treated as equal."""


# =============================================================================
# Capacity Limits
# =============================================================================

MAX_TAIL_TRIALS = 1_000_000
"""Largest ell accepted by the exact binomial tail."""

MAX_HETERO_VOTERS = 5_000
"""Largest convolved voter count for the Poisson-binomial error.

Voters sharing an agreement probability are grouped into one binomial
first, so the limit applies to the part that needs explicit convolution.
"""

MAX_POSTERIOR_VARIABLES = 12
"""Largest N for exact posterior enumeration over C(N, K) relevant sets."""

MAX_POSTERIOR_EXAMPLES = 12
"""Largest m for exact posterior enumeration."""

MAX_AUDIT_SAMPLES = 2_000_000
"""Upper limit on the (m + 1)**N agreement-count vectors a monotonicity audit enumerates."""


# =============================================================================
# Sampling Geometry
# =============================================================================

ROW_TILE = 64
"""Examples per random tile.

Every tile is drawn at full size and then sliced, so each uniform depends
only on (seed, stream, example, variable) and never on m, N, or which
columns were requested.
"""

COL_TILE = 1024
"""Variables per random tile."""

LABEL_CHUNK = 2**32 - 1
"""Column-chunk id reserved for the label draws of a row block."""

TRAIN_STREAM = 0
"""Random stream used for training datasets."""

TEST_STREAM = 1
"""Random stream used for fresh test examples in Monte Carlo error."""


# =============================================================================
# Experiment Harness
# =============================================================================

FAR_WORSE_FACTOR = 2.0
"""A model is "far worse" than the best one when its error is at least this multiple."""

FEW_IRRELEVANT_FRACTION = 0.25
"""Models whose irrelevant fraction is below this count as mostly relevant."""

DOMINANCE_SE_MULTIPLIER = 3.0
"""Standard errors allowed above a theorem bound before a record is a violation."""

FINITE_FORM_CEILING = 0.5
"""Bound dominance is only asserted where the finite-sample form is below this."""

MC_SE_MULTIPLIER = 4.0
"""Standard errors tolerated between a Monte Carlo estimate and its oracle."""

DEFAULT_MC_TRIALS = 10_000
"""Test draws per Monte Carlo error estimate when a config does not say."""

DEFAULT_TRAIN_EXAMPLES = 100
"""Training examples drawn by `source draw` when --m is not given."""

MAX_WORKERS_DEFAULT = 8
"""Upper cap on the default worker count derived from the CPU count."""


# =============================================================================
# Canonical Synthetic Benchmark
# =============================================================================

FIG2_N = 100_000
"""Total variables in the canonical benchmark."""

FIG2_K = 1_000
"""Relevant variables, half positive and half negative."""

FIG2_GAMMA = Fraction(1, 10)
"""Edge of every relevant variable."""

FIG2_M = 100
"""Training examples."""

FIG2_BETA_MAX = Fraction(3, 10)
"""Largest beta on the benchmark grid."""

FIG2_BETA_STEP = Fraction(1, 100)
"""Spacing of the benchmark beta grid."""

FIG2_REPLICATES = 3
"""Training sets drawn per benchmark run."""


# =============================================================================
# Output Formats
# =============================================================================

SWEEP_COLUMNS = (
    "replicate", "beta_num", "beta_den", "n", "k", "l", "irrelevant",
    "exclusivity", "error", "error_se", "t1_bound", "t2_bound", "t3_bound",
)
"""Fixed CSV column order for sweep records."""

AUDIT_COLUMNS = (
    "bound_id", "ell", "p", "eta_nominal", "eta_discrete", "threshold",
    "bound_value", "exact_tail", "margin", "status",
)
"""Fixed CSV column order for tail-bound audits."""
