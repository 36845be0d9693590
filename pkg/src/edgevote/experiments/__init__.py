"""Experiments built on the learner, the vote model and the bounds.

Each experiment implements a specific study:
- SweepExperiment: beta sweep with composition, error and bounds per model
- Fig2Experiment: the canonical 10^5-variable benchmark
- ExclusivityExperiment: inclusive versus exclusive learners
- DependenceExperiment: fixed vote over block-clique sources
- IrrelevantCountExperiment: irrelevant variables kept at one beta
- DominanceExperiment: replicate-mean error against the learning bounds

Note: Experiment classes are NOT imported here; use the registry in
harness.py, which loads only the experiment that runs.
"""

from .base import BaseExperiment, ExperimentRecord

__all__ = [
    "BaseExperiment",
    "ExperimentRecord",
]
