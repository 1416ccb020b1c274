"""Tail probabilities of a discrete many-sources queue: exact stationary law,
dominant-pole asymptotics and the Gaussian random-walk limit."""

from .distkit import SourceDistribution, bernoulli, from_pmf, load_distribution
from .errors import InputError, NumericalError, TailpoleError
from .scaling import SystemParams, capacity_for, derive_params

__all__ = [
    "SourceDistribution", "SystemParams", "bernoulli", "from_pmf", "load_distribution",
    "derive_params", "capacity_for", "TailpoleError", "InputError", "NumericalError",
]
__version__ = "0.1.0"
