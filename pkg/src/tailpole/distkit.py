"""Per-source demand distributions and their generating functions.

Only finite-support pmfs are handled, so every PGF here is a polynomial and
entire; infinite-support laws such as the Poisson are not representable.
All evaluators accept Python scalars or numpy arrays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path

import numpy as np

from .errors import (
    BranchAmbiguity,
    InputError,
    LatticePeriodic,
    NegativeMass,
    NotNormalized,
    ZeroVariance,
)

NORMALIZATION_TOL = 1e-9
BRANCH_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class SourceDistribution:
    """Demand generated by one source in one period.

    ``pmf[j]`` is P(X = j); trailing zeros are stripped so that
    ``degree == len(pmf) - 1`` is the largest value with positive mass.
    """

    pmf: np.ndarray
    mu: float
    sigma2: float
    support_span: int
    second_factorial: float  # X''(1) = E[X(X-1)]
    name: str = ""
    _coeffs: np.ndarray = field(repr=False, default=None)

    @property
    def degree(self) -> int:
        return len(self.pmf) - 1

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


def from_pmf(probs, name: str = "") -> SourceDistribution:
    """Validate ``probs`` and build a :class:`SourceDistribution`.

    The vector is renormalized to sum to one after the tolerance check, so
    inputs rounded to a few decimals are accepted.
    """
    p = np.asarray(probs, dtype=float).ravel()
    if p.size == 0:
        raise InputError("pmf must be nonempty")
    if not np.all(np.isfinite(p)):
        raise InputError("pmf entries must be finite")
    if np.any(p < 0):
        raise NegativeMass(f"negative probability at index {int(np.argmin(p))}")
    total = math.fsum(p)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"pmf sums to {total!r}")
    p = p / total
    support = np.flatnonzero(p > 0)
    p = p[: support[-1] + 1].copy()
    p.setflags(write=False)

    j = np.arange(p.size, dtype=float)
    mu = math.fsum(j * p)
    x2 = math.fsum(j * (j - 1) * p)
    sigma2 = x2 - mu * mu + mu
    if sigma2 <= 1e-15 or support.size < 2:
        raise ZeroVariance("degenerate source distribution (variance 0)")
    span = reduce(math.gcd, (int(d) for d in np.diff(support)))
    if span > 1:
        raise LatticePeriodic(span)
    coeffs = p[::-1].copy()
    coeffs.setflags(write=False)
    return SourceDistribution(
        pmf=p,
        mu=mu,
        sigma2=sigma2,
        support_span=span,
        second_factorial=x2,
        name=name,
        _coeffs=coeffs,
    )


def load_distribution(path) -> SourceDistribution:
    """Read a ``{"name": ..., "pmf": [...]}`` JSON file."""
    with open(Path(path), encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "pmf" not in doc:
        raise InputError(f"{path}: expected an object with a 'pmf' array")
    return from_pmf(doc["pmf"], name=str(doc.get("name", "")))


def dump_distribution(d: SourceDistribution) -> str:
    return json.dumps({"name": d.name, "pmf": [float(x) for x in d.pmf]})


def pgf(d: SourceDistribution, z):
    """X(z) by Horner's scheme."""
    acc = 0.0
    for c in d._coeffs:
        acc = acc * z + c
    return acc


def pgf_derivs(d: SourceDistribution, z):
    """Return ``(X(z), X'(z), X''(z))``.

    Uses the three-term Horner recurrence. At exactly ``z == 1`` the stored
    moments are returned, so the triple is ``(1, mu, X''(1))`` without
    rounding.
    """
    if np.ndim(z) == 0 and z == 1:
        return 1.0 + 0j, complex(d.mu), complex(d.second_factorial)
    p0 = 0.0
    p1 = 0.0
    p2 = 0.0
    for c in d._coeffs:
        p2 = p2 * z + 2.0 * p1
        p1 = p1 * z + p0
        p0 = p0 * z + c
    return p0, p1, p2


def _check_branch(x) -> None:
    bad = (np.abs(np.imag(x)) <= BRANCH_TOL) & (np.real(x) <= BRANCH_TOL)
    if np.any(bad):
        raise BranchAmbiguity("X(z) lies on the branch cut of the logarithm (nonpositive real)")


def log_pgf(d: SourceDistribution, z):
    """Principal logarithm of X(z)."""
    x = pgf(d, z)
    _check_branch(x)
    if np.ndim(x) == 0:
        return complex(np.log(complex(x)))
    return np.log(np.asarray(x, dtype=complex))


def log_aggregate(d: SourceDistribution, n: int, z):
    """``n * log X(z)``, the logarithm of A(z) = X(z)**n.

    Callers should only exponentiate differences such as
    ``n log X(z) - s log z``; A(z) itself overflows for large n.
    """
    return n * log_pgf(d, z)


def bernoulli(p: float, name: str | None = None) -> SourceDistribution:
    return from_pmf([1.0 - p, p], name=name if name is not None else f"bernoulli({p})")
