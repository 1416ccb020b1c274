"""Zeros of ``z**s - A(z)`` inside and outside the unit disk, and the saddle
point of ``g(z) = -log z + (n/s) log X(z)`` on the real axis.

Every Newton iteration works on the log form

    F(z) = s * Log(z * exp(-2 pi i m / s)) - n * Log X(z)

whose zeros are zeros of ``z**s - A(z)``. Rotating ``z`` by the seed
direction before taking the principal log keeps the branch cut away from the
zero being polished, so labels follow the root-of-unity direction ``m`` and
the same code serves interior (``m = j``) and exterior (``m = k``) zeros.
For zeros near 1 this coincides with ``s log z - n log X(z) - 2 pi i m``.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from . import distkit
from .errors import (
    BracketFailure,
    Collision,
    InputError,
    NoConvergence,
    OrderViolation,
    PhaseJump,
)
from .scaling import SystemParams, asym_exterior_zero, asym_interior_zero

TWO_PI = 2.0 * math.pi

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 200
MAX_HALVINGS = 8
WARMUP_SWEEPS = 5
COLLISION_TOL = 1e-9


class ZeroKind(str, Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"
    SADDLE = "saddle"


@dataclass(frozen=True)
class Zero:
    value: complex
    index: int
    kind: ZeroKind
    residual: float
    iterations: int


@dataclass(frozen=True)
class PoleSet:
    interior: tuple[Zero, ...]
    exterior: tuple[Zero, ...]  # k = -k_max .. k_max
    saddle: Zero

    @property
    def k_max(self) -> int:
        return (len(self.exterior) - 1) // 2

    def Z(self, k: int) -> complex:
        if abs(k) > self.k_max:
            raise InputError(f"exterior zero {k} not computed (k_max = {self.k_max})")
        return self.exterior[k + self.k_max].value

    @property
    def Z0(self) -> float:
        return self.Z(0).real

    def interior_values(self, include_one: bool = False) -> np.ndarray:
        zs = self.interior if include_one else self.interior[1:]
        return np.array([z.value for z in zs], dtype=complex)


def _residual_floor(p: SystemParams) -> float:
    # F sums O(s + n) rounded terms; below this level Newton only stirs noise.
    return 64.0 * (p.s + p.n) * np.finfo(float).eps


def log_equation(p: SystemParams, z: complex, m: int) -> tuple[complex, complex]:
    """``(F(z), F'(z))`` for label ``m``."""
    d = p.dist
    x, dx, _ = distkit.pgf_derivs(d, z)
    x = complex(x)
    rot = cmath.exp(-1j * TWO_PI * m / p.s) if m else 1.0
    f = p.s * cmath.log(z * rot) - p.n * cmath.log(x)
    fp = p.s / z - p.n * complex(dx) / x
    return f, fp


def _eval(p: SystemParams, z: complex, m: int):
    try:
        return log_equation(p, z, m)
    except (ValueError, ZeroDivisionError):  # X(z) = 0 or z = 0
        return None


def _newton(p: SystemParams, z: complex, m: int) -> tuple[complex, float, int]:
    ev = _eval(p, z, m)
    if ev is None:
        raise NoConvergence(m, f"seed for index {m} sits on a zero of X")
    f, fp = ev
    r = abs(f)
    floor = _residual_floor(p)
    for it in range(1, NEWTON_MAXITER + 1):
        if r < NEWTON_TOL:
            return z, r, it - 1
        step = f / fp
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            cand = z - step
            ev = _eval(p, cand, m)
            if ev is not None:
                fc, fpc = ev
                if abs(fc) < r:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            # No descent left: either converged to the rounding floor or stuck.
            if r <= floor:
                return z, r, it
            raise NoConvergence(m, f"Newton stalled for index {m} at |F| = {r:.3e}")
        if abs(cand - z) <= 4 * np.finfo(float).eps * abs(cand) and abs(fc) <= floor:
            return cand, abs(fc), it
        z, f, fp, r = cand, fc, fpc, abs(fc)
    raise NoConvergence(m, f"no convergence for index {m} after {NEWTON_MAXITER} iterations")


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _warmup_seed(p: SystemParams, j: int) -> complex:
    w = cmath.exp(1j * TWO_PI * j / p.s)
    z = p.rho * w
    for _ in range(WARMUP_SWEEPS):
        x = complex(distkit.pgf(p.dist, z))
        if x == 0:
            break
        # heuristic only, so the raw principal log is fine even on the cut
        z = w * cmath.exp((p.n / p.s) * cmath.log(x))
    return z


def interior_seed(p: SystemParams, j: int) -> complex:
    """Starting point for ``z_j``: the asymptotic location for ``min(j, s-j)
    <= sqrt(s)``, else a few sweeps of ``z <- w_j X(z)**(n/s)`` from
    ``rho * w_j`` with ``w_j = exp(2 pi i j/s)``."""
    if min(j, p.s - j) <= math.sqrt(p.s):
        return asym_interior_zero(p, j)
    return _warmup_seed(p, j)


def _interior_one(p: SystemParams, j: int) -> Zero | None:
    """Labelled Newton for ``z_j``; ``None`` if no branch-consistent zero is found."""
    for seed in (interior_seed(p, j), _warmup_seed(p, j)):
        try:
            z, r, it = _newton(p, seed, j)
        except NoConvergence:
            continue
        if abs(z) <= 1.0 + 1e-12:
            return Zero(complex(z), j, ZeroKind.INTERIOR, r, it)
    return None


def _reduced_residual(p: SystemParams, z: complex) -> float:
    """``|s log z - n log X(z)|`` reduced modulo ``2 pi i``."""
    f = log_equation(p, z, 0)[0]
    return abs(complex(f.real, (f.imag + math.pi) % TWO_PI - math.pi))


def _f_log_derivative(p: SystemParams, z: complex) -> complex:
    """``f'/f`` for ``f(z) = z**s - A(z)``, without forming either power."""
    x, dx, _ = distkit.pgf_derivs(p.dist, z)
    lr = complex(log_ratio(p, z))
    return p.s / z + (p.s / z - p.n * complex(dx) / complex(x)) / complex(np.expm1(-lr))


def _deflated_newton(p: SystemParams, seed: complex, known: np.ndarray) -> tuple[complex, int]:
    # Newton on f(z) / prod(z - known): previously found zeros repel the iterate
    z = complex(seed)
    for it in range(1, NEWTON_MAXITER + 1):
        denom = _f_log_derivative(p, z) - np.sum(1.0 / (z - known))
        step = 1.0 / denom
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    else:
        raise NoConvergence(-1, "deflated Newton did not converge")
    for _ in range(3):  # undeflated polish
        z -= 1.0 / _f_log_derivative(p, z)
    return z, it


def _repair(p: SystemParams, j: int, known: list[complex]) -> Zero:
    """Fallback when the label ``j`` has no branch-consistent zero (tiny ``s``,
    where ``arg X`` wraps): deflated Newton on ``z**s - A(z)`` itself."""
    ref = np.array(known)
    for seed in (_warmup_seed(p, j), interior_seed(p, j), p.rho * cmath.exp(1j * TWO_PI * j / p.s)):
        try:
            z, it = _deflated_newton(p, seed, ref)
        except (NoConvergence, ZeroDivisionError, OverflowError):
            continue
        r = _reduced_residual(p, z)
        if (abs(z) <= 1.0 + 1e-12 and r < NEWTON_TOL * 10
                and np.min(np.abs(ref - z)) > COLLISION_TOL):
            return Zero(complex(z), j, ZeroKind.INTERIOR, r, it)
    raise NoConvergence(j, f"no interior zero found for index {j}")


def _duplicates(vals: np.ndarray) -> set[int]:
    tree = cKDTree(np.column_stack([vals.real, vals.imag]))
    return {max(a, b) for a, b in tree.query_pairs(COLLISION_TOL)}


def interior_zeros(p: SystemParams, workers: int | None = None) -> list[Zero]:
    """All ``s`` zeros in the closed unit disk, ordered by label ``j``.

    ``z_0 = 1`` is assigned, not solved. Labels whose Newton run fails or
    lands on an already-found zero are re-solved by deflation, in index order.
    """
    zeros: list[Zero | None] = [Zero(1.0 + 0j, 0, ZeroKind.INTERIOR, 0.0, 0)]
    zeros += _map(lambda j: _interior_one(p, j), range(1, p.s), workers)
    found = [i for i, z in enumerate(zeros) if z is not None]
    if len(found) > 1:
        vals = np.array([zeros[i].value for i in found])
        for pos in _duplicates(vals):
            zeros[found[pos]] = None
    for j, z in enumerate(zeros):
        if z is None:
            known = [w.value for w in zeros if w is not None]
            zeros[j] = _repair(p, j, known)
    vals = np.array([z.value for z in zeros])
    if len(vals) > 1:
        pairs = cKDTree(np.column_stack([vals.real, vals.imag])).query_pairs(COLLISION_TOL)
        if pairs:
            a, b = sorted(pairs)[0]
            raise Collision(f"interior zeros {a} and {b} coincide (seed or branch error)")
    return zeros


def _log_h(p: SystemParams, x: float) -> float:
    # s log x - n log X(x) on the real axis; positive on (1, Z0).
    return p.s * math.log(x) - p.n * math.log(float(distkit.pgf(p.dist, x)))


def dominant_pole(p: SystemParams) -> Zero:
    """``Z_0``: the unique real zero in ``(1, inf)``, by bracketing then Newton."""
    z0_hat = asym_exterior_zero(p, 0).real
    cap = 2.0 * z0_hat
    while _log_h(p, cap) >= 0:
        cap *= 2.0
        if cap > 1e6:
            raise BracketFailure("no sign change of s log z - n log X(z) found right of 1")
    lo = 1.0 + 1e-3 * (z0_hat - 1.0)
    while _log_h(p, lo) <= 0:
        lo = 1.0 + (lo - 1.0) / 16
        if lo - 1.0 < 1e-14:
            raise BracketFailure("s log z - n log X(z) not positive right of 1")
    x = brentq(lambda t: _log_h(p, t), lo, cap, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    z, r, it = _newton(p, complex(x), 0)
    return Zero(complex(z.real, 0.0), 0, ZeroKind.EXTERIOR, r, it)


def exterior_zeros(p: SystemParams, k_max: int, workers: int | None = None) -> list[Zero]:
    """``Z_k`` for ``k = -k_max .. k_max``; ``Z_{-k}`` is the conjugate of ``Z_k``."""
    if k_max < 0:
        raise InputError("k_max must be nonnegative")
    z0 = dominant_pole(p)

    def one(k):
        z, r, it = _newton(p, asym_exterior_zero(p, k), k)
        if abs(z) <= 1.0:
            raise NoConvergence(k, f"exterior index {k} converged into the unit disk")
        return Zero(complex(z), k, ZeroKind.EXTERIOR, r, it)

    pos = [z0] + _map(one, range(1, k_max + 1), workers)
    mods = [abs(z.value) for z in pos]
    for k in range(1, len(mods)):
        if mods[k] < mods[k - 1]:
            raise OrderViolation(
                f"|Z_{k}| < |Z_{k - 1}|: s = {p.s} too small for k_max = {k_max}"
            )
    neg = [
        Zero(z.value.conjugate(), -z.index, z.kind, z.residual, z.iterations)
        for z in reversed(pos[1:])
    ]
    return neg + pos


def saddle_point(p: SystemParams, Z0: float) -> Zero:
    """Real solution of ``z n X'(z) = s X(z)`` in ``(1, Z0)``."""
    d = p.dist

    def f(x):
        v, dv, _ = distkit.pgf_derivs(d, x)
        return float((p.s * v - p.n * x * dv).real)

    def fp(x):
        _, dv, d2v = distkit.pgf_derivs(d, x)
        return float((p.s * dv - p.n * (dv + x * d2v)).real)

    lo, hi = 1.0, float(Z0)
    flo, fhi = float(p.s - p.mu_A), f(hi)
    if not (flo > 0 > fhi):
        raise BracketFailure(f"saddle equation does not change sign on (1, {Z0})")
    x = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    iters = 0
    for iters in range(1, 4):
        step = f(x) / fp(x)
        if not lo < x - step < hi:
            break
        x -= step
        if abs(step) <= 2 * np.finfo(float).eps * x:
            break
    # residual of the stationarity condition, scaled like the zero residuals
    res = abs(f(x)) / abs(float(distkit.pgf(d, x))) * x
    return Zero(complex(x, 0.0), 0, ZeroKind.SADDLE, res, iters)


def find_poles(p: SystemParams, k_max: int = 0, workers: int | None = None) -> PoleSet:
    ext = exterior_zeros(p, k_max, workers)
    Z0 = ext[k_max].value.real
    return PoleSet(
        interior=tuple(interior_zeros(p, workers)),
        exterior=tuple(ext),
        saddle=saddle_point(p, Z0),
    )


def log_ratio(p: SystemParams, z):
    """A logarithm of ``A(z) / z**s``.

    Only meant to be exponentiated: n and s are integers, so the branch of
    the logs does not matter and no branch check is made.
    """
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        return p.n * np.log(distkit.pgf(p.dist, z)) - p.s * np.log(z)


def substitution_residual(p: SystemParams, z) -> np.ndarray:
    """``|z**s - A(z)| / |z|**s`` evaluated in log space."""
    return np.abs(-np.expm1(log_ratio(p, z)))


def argument_principle_count(p: SystemParams, radius: float, min_points: int | None = None) -> int:
    """Number of zeros of ``z**s - A(z)`` in ``|z| < radius``.

    ``z**s`` contributes winding ``s`` exactly; the phase of
    ``1 - A(z)/z**s`` is accumulated numerically.
    """
    m = max(64 * p.s, 1024) if min_points is None else min_points
    for _ in range(4):
        theta = TWO_PI * np.arange(m + 1) / m
        z = radius * np.exp(1j * theta)
        z[-1] = z[0]
        w = -np.expm1(log_ratio(p, z))
        dphi = np.angle(w[1:] / w[:-1])
        if np.max(np.abs(dphi)) <= math.pi / 2:
            return p.s + int(round(math.fsum(dphi) / TWO_PI))
        m *= 2
    raise PhaseJump(f"phase resolution insufficient on |z| = {radius} even with {m // 2} points")
