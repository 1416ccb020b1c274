"""System parameters of the critical many-sources regime and the closed-form
asymptotic locations of poles and the saddle point.

Notation: ``gamma`` is the slack in ``n*mu/s = 1 - gamma/sqrt(s)``,
``a0 = sqrt(2 mu)/sigma`` and ``b0 = gamma*a0/2`` are the clustering
constants, ``beta = sqrt(2)*b0`` is the drift of the limiting Gaussian walk
and ``d0 = 2 gamma mu / sigma^2`` is the scale of ``sqrt(s)*(Z0 - 1)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .distkit import SourceDistribution
from .errors import DegreeTooSmall, InputError, Unstable


@dataclass(frozen=True)
class SystemParams:
    n: int
    s: int
    dist: SourceDistribution
    gamma: float
    rho: float
    a0: float
    b0: float
    beta: float
    d0: float
    mu_A: float

    @property
    def sqrt_s(self) -> float:
        return math.sqrt(self.s)


def derive_params(n: int, s: int, d: SourceDistribution) -> SystemParams:
    if int(n) != n or n < 1 or int(s) != s or s < 1:
        raise InputError(f"n and s must be positive integers (got n={n}, s={s})")
    n, s = int(n), int(s)
    mu_A = n * d.mu
    if not 0 < mu_A < s:
        raise Unstable(f"aggregate mean n*mu = {mu_A!r} is not below capacity s = {s}")
    if n * d.degree <= s:
        raise DegreeTooSmall(
            f"n*degree(X) = {n * d.degree} must exceed s = {s} (else the queue never grows)"
        )
    sigma = d.sigma
    gamma = (s - mu_A) / math.sqrt(s)
    a0 = math.sqrt(2.0 * d.mu) / sigma
    b0 = gamma * math.sqrt(d.mu) / (sigma * math.sqrt(2.0))
    return SystemParams(
        n=n,
        s=s,
        dist=d,
        gamma=gamma,
        rho=mu_A / s,
        a0=a0,
        b0=b0,
        beta=b0 * math.sqrt(2.0),
        d0=2.0 * gamma * d.mu / d.sigma2,
        mu_A=mu_A,
    )


def capacity_for(n: int, beta: float, d: SourceDistribution) -> int:
    """Square-root staffing ``s = ceil(n mu + beta sigma sqrt(n))``.

    A 1e-9 guard keeps values that are integers up to rounding from being
    pushed to the next integer.
    """
    if not beta > 0:
        raise InputError("beta must be positive")
    target = n * d.mu + beta * d.sigma * math.sqrt(n)
    return int(math.ceil(target - 1e-9))


def asym_interior_zero(p: SystemParams, j: int) -> complex:
    """Leading-order location of the interior zero ``z_j``.

    The label ``j`` matches the root of unity ``exp(2 pi i j/s)`` used as seed
    direction in :mod:`tailpole.roots`.
    """
    if j == 0:
        return 1.0 + 0j
    if not 1 <= j <= p.s - 1:
        raise InputError(f"interior index must lie in [0, {p.s - 1}], got {j}")
    if j > p.s / 2:
        return asym_interior_zero(p, p.s - j).conjugate()
    root = cmath.sqrt(p.b0 * p.b0 - 2j * math.pi * j)
    return 1.0 + (p.a0 / p.sqrt_s) * (p.b0 - root)


def asym_exterior_zero(p: SystemParams, t: float) -> complex:
    """Leading-order exterior zero ``Z(t)``; ``t`` may be fractional."""
    root = cmath.sqrt(p.b0 * p.b0 - 2j * math.pi * t)
    return 1.0 + (p.a0 / p.sqrt_s) * (root + p.b0)


def asym_landmarks(p: SystemParams) -> tuple[float, float]:
    """Return ``(z_sp_hat, Z0_hat)``; the saddle sits midway between 1 and Z0."""
    half = p.d0 / (2.0 * p.sqrt_s)
    return 1.0 + half, 1.0 + 2.0 * half
