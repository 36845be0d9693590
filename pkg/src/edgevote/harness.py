"""Experiment lookup by name."""

from __future__ import annotations

import importlib
import logging

from .errors import ParameterDomainError

logger = logging.getLogger(__name__)

# Lazy registry: experiment name -> (module path, class name)
_EXPERIMENT_REGISTRY: dict[str, tuple[str, str]] = {
    "sweep": ("edgevote.experiments.sweep", "SweepExperiment"),
    "fig2": ("edgevote.experiments.fig2", "Fig2Experiment"),
    "exclusivity": ("edgevote.experiments.exclusivity", "ExclusivityExperiment"),
    "dependence": ("edgevote.experiments.dependence", "DependenceExperiment"),
    "irrelevant": ("edgevote.experiments.irrelevant", "IrrelevantCountExperiment"),
    "dominance": ("edgevote.experiments.dominance", "DominanceExperiment"),
}

_experiment_cache: dict[str, type] = {}


def experiment_names() -> list[str]:
    return sorted(_EXPERIMENT_REGISTRY)


def get_experiment_class(name: str) -> type:
    """Lazily load and return an experiment class.

    Raises:
        ParameterDomainError: If the name is not registered.
    """
    if name in _experiment_cache:
        return _experiment_cache[name]

    if name not in _EXPERIMENT_REGISTRY:
        valid = ", ".join(experiment_names())
        raise ParameterDomainError(f"Unknown experiment: {name}. Valid experiments: {valid}")

    module_path, class_name = _EXPERIMENT_REGISTRY[name]
    module = importlib.import_module(module_path)
    experiment_class = getattr(module, class_name)

    _experiment_cache[name] = experiment_class
    return experiment_class


def create_experiment(name: str, *args, **kwargs):
    """Instantiate a registered experiment."""
    logger.debug("Creating experiment %s", name)
    return get_experiment_class(name)(*args, **kwargs)
