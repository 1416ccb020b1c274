"""Gaussian random walk limit of the scaled queue.

``M_beta`` is the all-time maximum of a walk with N(-beta, 1) increments.
``P(M_beta = 0)`` and the tail prefactor ``h(beta)`` are power series in
``beta**2/2`` whose coefficients are ``zeta(1/2 - r)``; Spitzer's identity
gives an independent route to ``P(M_beta = 0)`` for every ``beta > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, NumericalError, OutOfRange
from .scaling import SystemParams

SERIES_EDGE = 2.0 * math.sqrt(math.pi)  # beta bound; x = beta^2/2 < 2 pi
ZETA_R_MAX = 60
SERIES_TERM_TOL = 1e-16
SERIES_R_CAP = 5000
SPITZER_TERM_TOL = 1e-18

# B_2, B_4, ..., B_26
_B2J = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66),
    Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510), Fraction(43867, 798),
    Fraction(-174611, 330), Fraction(854513, 138), Fraction(-236364091, 2730),
    Fraction(8553103, 6),
]
_EM_COEF = [float(b / math.factorial(2 * j)) for j, b in enumerate(_B2J, start=1)]


@dataclass(frozen=True)
class GrwParams:
    beta: float
    K: float

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError("beta must be positive")


def zeta_euler_maclaurin(s: float, N: int = 32) -> float:
    """Riemann zeta at real ``s != 1`` by Euler-Maclaurin summation.

    Accurate to about 1e-15 relative for ``s >= -1``; for strongly negative
    ``s`` cancellation ruins it, so those go through the functional equation.
    """
    if s == 1:
        raise DomainError("zeta has a pole at s = 1")
    head = math.fsum(k ** -s for k in range(1, N))
    parts = [N ** (1.0 - s) / (s - 1.0), 0.5 * N ** -s]
    rising = s
    power = N ** (-s - 1.0)
    for j, c in enumerate(_EM_COEF, start=1):
        parts.append(c * rising * power)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= N * N
    return head + math.fsum(parts)


def _sin_quarter(r: int) -> float:
    # sin(pi (1/2 - r) / 2) = sin(pi/4 - r pi/2)
    return (1.0, -1.0, -1.0, 1.0)[r % 4] * math.sqrt(0.5)


@lru_cache(maxsize=None)
def _zeta_table() -> tuple[float, ...]:
    out = [zeta_euler_maclaurin(0.5)]
    for r in range(1, ZETA_R_MAX + 1):
        s = 0.5 - r
        out.append(
            2.0 ** s * math.pi ** (s - 1.0) * _sin_quarter(r)
            * math.gamma(1.0 - s) * zeta_euler_maclaurin(1.0 - s)
        )
    return tuple(out)


def zeta_half(r: int) -> float:
    """``zeta(1/2 - r)`` for ``0 <= r <= 60``.

    ``r = 0`` is summed directly; for ``r >= 1`` the functional equation maps
    to ``zeta(r + 1/2)``, which converges quickly.
    """
    if int(r) != r or not 0 <= r <= ZETA_R_MAX:
        raise OutOfRange(f"r must be an integer in [0, {ZETA_R_MAX}], got {r}")
    return _zeta_table()[int(r)]


def _series_term(r: int, x: float) -> float:
    """``zeta(1/2 - r) (-x)^r / (r! (2r + 1))``."""
    if r <= ZETA_R_MAX:
        return zeta_half(r) * (-x) ** r / (math.factorial(r) * (2 * r + 1))
    # log form past the table, where gamma and factorial overflow
    s = 0.5 - r
    log_mag = (
        s * math.log(2.0) + (s - 1.0) * math.log(math.pi) + 0.5 * math.log(0.5)
        + math.lgamma(1.0 - s) + math.log(zeta_euler_maclaurin(1.0 - s))
        + r * math.log(x) - math.lgamma(r + 1.0) - math.log(2 * r + 1)
    )
    sign = (1.0, -1.0, -1.0, 1.0)[r % 4] * (-1.0) ** r
    return sign * math.exp(log_mag)


def zeta_series(x: float) -> float:
    """``sum_r zeta(1/2 - r) (-x)^r / (r! (2r + 1))`` for ``0 <= x < 2 pi``.

    Stops once a term falls below 1e-16 in absolute value; terms must be
    shrinking by then, which guards against the divergence edge at 2 pi.
    """
    if not 0 <= x < 2.0 * math.pi:
        raise DomainError(f"series diverges for x = {x} >= 2 pi")
    terms = []
    prev = math.inf
    for r in range(SERIES_R_CAP):
        t = _series_term(r, x) if x > 0 or r == 0 else 0.0
        terms.append(t)
        if abs(t) < SERIES_TERM_TOL and abs(t) <= prev:
            return math.fsum(terms)
        prev = abs(t)
    raise NumericalError(f"zeta series not converged after {SERIES_R_CAP} terms (x = {x})")


def _check_series_beta(beta: float) -> None:
    if not 0 < beta < SERIES_EDGE:
        raise DomainError(f"series formulas need 0 < beta < 2 sqrt(pi); got beta = {beta}")


def prob_max_zero(beta: float) -> float:
    """``P(M_beta = 0)`` from the zeta series."""
    _check_series_beta(beta)
    x = 0.5 * beta * beta
    return math.sqrt(2.0) * beta * math.exp(beta / math.sqrt(2.0 * math.pi) * zeta_series(x))


def h_beta(beta: float) -> float:
    """Limit prefactor ``h(beta)`` of ``P(M_beta > K) ~ h(beta) exp(-2 beta K)``."""
    _check_series_beta(beta)
    x = 0.5 * beta * beta
    return math.exp(beta * math.sqrt(2.0 / math.pi) * zeta_series(x))


def spitzer_oracle(beta: float, chunk: int = 1 << 14) -> float:
    """``P(M_beta = 0) = exp(-sum_k Phi(-beta sqrt(k)) / k)``.

    Valid for every ``beta > 0``. ``Phi`` is ``scipy.special.ndtr``, which
    goes through ``erfc`` and keeps full relative accuracy in the far tail.
    """
    if not beta > 0:
        raise DomainError("beta must be positive")
    partial = []
    start = 1
    while True:
        k = np.arange(start, start + chunk, dtype=float)
        t = ndtr(-beta * np.sqrt(k)) / k
        small = np.flatnonzero(t < SPITZER_TERM_TOL)
        if small.size:
            partial.append(math.fsum(t[: small[0]]))
            break
        partial.append(math.fsum(t))
        start += chunk
    return math.exp(-math.fsum(partial))


def grw_tail(beta: float, K: float) -> float:
    """``h(beta) exp(-2 beta K)``, capped at 1."""
    return min(1.0, h_beta(beta) * math.exp(-2.0 * beta * K))


def map_scalings(p: SystemParams, N: int) -> tuple[float, float, float]:
    """Queue level ``N`` to walk coordinates: returns ``(beta, K, L)`` with
    ``N + 1 = L sqrt(s)`` and ``K = L sqrt(mu) / sigma``."""
    L = (N + 1) / p.sqrt_s
    K = L * math.sqrt(p.dist.mu) / p.dist.sigma
    return p.beta, K, L
