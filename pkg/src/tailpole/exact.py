"""Ground truth for the queue ``Q_{k+1} = max(Q_k + A_k - s, 0)``.

The stationary law comes from iterating the distributional recursion to its
fixed point (deterministic, no sampling). The product form and Pollaczek's
contour integral give independent routes to ``Q(z)`` and ``P(Q = 0)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from ._quad import circle_mean
from .distkit import SourceDistribution, pgf
from .errors import BeyondTruncation, NoConvergence, OutsideDomain, TooLarge
from .roots import PoleSet, log_ratio
from .scaling import SystemParams

MAX_AGGREGATE_SUPPORT = 10**6
STEP_TOL = 1e-13
FLOOR_TOL = 1e-17
STALL_WINDOW = 25
TAIL_CUT = 1e-18
ARRIVAL_CUT = 1e-20
MAX_ITER = 10**6
_FFT_THRESHOLD = 1 << 14
NEAR_ONE = 1e-3


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    pmf: np.ndarray
    truncation_T: int
    tail_mass_bound: float
    iterations: int
    step_delta: float

    def mean(self) -> float:
        return math.fsum(np.arange(self.pmf.size) * self.pmf)


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if min(a.size, b.size) < _FFT_THRESHOLD:
        return np.convolve(a, b)
    return np.clip(fftconvolve(a, b), 0.0, None)


def aggregate_pmf(d: SourceDistribution, n: int) -> np.ndarray:
    """pmf of ``X_1 + ... + X_n`` by repeated squaring of the convolution."""
    if n * d.degree > MAX_AGGREGATE_SUPPORT:
        raise TooLarge(f"aggregate support {n * d.degree} exceeds {MAX_AGGREGATE_SUPPORT}")
    result = np.array([1.0])
    base = np.asarray(d.pmf, dtype=float)
    k = int(n)
    while k:
        if k & 1:
            result = _convolve(result, base)
        k >>= 1
        if k:
            base = _convolve(base, base)
    return result


def _trimmed_arrivals(p: SystemParams) -> tuple[np.ndarray, int]:
    a = aggregate_pmf(p.dist, p.n)
    cdf = np.cumsum(a)
    lo = int(np.searchsorted(cdf, ARRIVAL_CUT, side="right"))
    sf = np.cumsum(a[::-1])
    hi = a.size - int(np.searchsorted(sf, ARRIVAL_CUT, side="right"))
    lo = min(lo, p.s)
    return a[lo:hi], lo


def _lindley_step(q: np.ndarray, a: np.ndarray, lo: int, s: int) -> np.ndarray:
    c = np.convolve(q, a)  # c[i] = P(Q + A = i + lo)
    cut = s - lo
    out = np.empty(max(c.size - cut, 1))
    out[0] = math.fsum(c[: cut + 1])
    out[1:] = c[cut + 1 :]
    return out


def _l1_diff(x: np.ndarray, y: np.ndarray) -> float:
    m = max(x.size, y.size)
    return float(np.sum(np.abs(np.pad(x, (0, m - x.size)) - np.pad(y, (0, m - y.size)))))


def stationary_lindley(p: SystemParams, step_tol: float = STEP_TOL,
                       max_iter: int = MAX_ITER) -> StationaryDistribution:
    """Iterate ``q <- reflect(shift_s(q * a))`` from the empty queue to the
    fixed point.

    Once the L1 step drops below ``step_tol`` the iteration keeps going until
    the step stops shrinking (rounding floor) or falls below 1e-17: with
    contraction rate ``r`` the distance to the fixed point is about
    ``step / (1 - r)``, which for slowly mixing chains is far above the step
    itself. The support is cut where the remaining tail drops below 1e-18;
    the dropped mass is accumulated in ``tail_mass_bound``.
    """
    a, lo = _trimmed_arrivals(p)
    q = np.array([1.0])
    dropped = 0.0
    delta = math.inf
    best, since_best = math.inf, 0
    for it in range(1, max_iter + 1):
        new = _lindley_step(q, a, lo, p.s)
        tail = np.cumsum(new[::-1])[::-1]
        keep = int(np.searchsorted(-tail, -TAIL_CUT, side="left"))
        keep = max(keep, 1)
        dropped += float(np.sum(new[keep:]))
        new = new[:keep]
        delta = _l1_diff(new, q)
        q = new
        if delta < step_tol:
            if delta < best:
                best, since_best = delta, 0
            else:
                since_best += 1
            if delta < FLOOR_TOL or since_best >= STALL_WINDOW:
                break
    else:
        if not delta < step_tol:
            raise NoConvergence(-1, f"Lindley iteration did not settle in {max_iter} steps")
    q.setflags(write=False)
    return StationaryDistribution(
        pmf=q, truncation_T=q.size - 1, tail_mass_bound=dropped, iterations=it, step_delta=delta
    )


def fixed_point_residual(p: SystemParams, sd: StationaryDistribution) -> float:
    """L1 change produced by one more (untruncated) Lindley step."""
    a, lo = _trimmed_arrivals(p)
    return _l1_diff(_lindley_step(np.asarray(sd.pmf), a, lo, p.s), sd.pmf)


def tail_exact(sd: StationaryDistribution, N: int, precision: float = 1e-12) -> float:
    """``P(Q > N)``, clamped to [0, 1].

    Summed directly over ``i > N`` rather than as ``1 - sum_{i <= N} q_i``;
    the two agree up to the truncated mass, and the direct sum keeps full
    relative accuracy deep in the tail.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N > sd.truncation_T:
        missing = max(0.0, 1.0 - math.fsum(sd.pmf))
        if missing + sd.tail_mass_bound > precision:
            raise BeyondTruncation(f"N = {N} exceeds truncation T = {sd.truncation_T}")
    val = math.fsum(sd.pmf[N + 1 :])
    return min(1.0, max(0.0, val))


def pmf_csv(sd: StationaryDistribution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "q_i", "cumulative"])
    acc = 0.0
    for i, qi in enumerate(sd.pmf):
        acc += qi
        w.writerow([i, repr(float(qi)), repr(float(acc))])
    return buf.getvalue()


def _log_denominator(p: SystemParams, z: complex) -> complex:
    """A logarithm of ``z**s - A(z)``, stable for large s."""
    if z == 0:
        return p.n * math.log(p.dist.pmf[0]) + 1j * math.pi
    lr = complex(log_ratio(p, z))
    if lr.real < 0:
        return p.s * np.log(z) + np.log(-np.expm1(lr))
    return p.n * np.log(complex(pgf(p.dist, z))) + np.log(np.expm1(-lr))


def _clog1p(w: complex) -> complex:
    # numpy's complex log1p is evaluated as log(1 + w) and loses small w
    w = complex(w)
    return complex(0.5 * math.log1p(2.0 * w.real + abs(w) ** 2),
                   math.atan2(w.imag, 1.0 + w.real))


def _log_front_near_one(p: SystemParams, w: complex) -> complex:
    """``log((s - mu_A) w / ((1 + w)**s - A(1 + w)))`` without cancellation."""
    k = np.arange(p.dist.pmf.size)
    lw = _clog1p(w)
    x_minus_1 = complex(np.dot(p.dist.pmf, np.expm1(k * lw)))
    log_x = _clog1p(x_minus_1)
    D = p.s * lw - p.n * log_x
    return math.log(p.s - p.mu_A) + np.log(w) - p.n * log_x - np.log(np.expm1(D))


def q_pgf_product(p: SystemParams, poles: PoleSet, z: complex) -> complex:
    """``Q(z)`` from the product over the interior zeros."""
    z = complex(z)
    Z0 = poles.Z0
    if abs(z) >= Z0 - 1e-9:
        raise OutsideDomain(f"|z| = {abs(z)} is not inside the disk of radius Z0 = {Z0}")
    zj = poles.interior_values()
    # log((z - z_j)/(1 - z_j)) up to multiples of 2 pi i, which exp removes
    terms = np.array([_clog1p(w) for w in (z - 1.0) / (1.0 - zj)])
    log_prod = complex(math.fsum(terms.real), math.fsum(terms.imag))
    if z == 1:
        return 1 + 0j
    if abs(z - 1.0) < NEAR_ONE:
        log_front = _log_front_near_one(p, z - 1.0)
    else:
        log_front = math.log(p.s - p.mu_A) + np.log(z - 1.0) - _log_denominator(p, z)
    return complex(np.exp(log_front + log_prod))


def pollaczek_log_q0(p: SystemParams, z_sp: float, tol: float = 1e-10) -> float:
    """``log P(Q = 0)`` from the contour integral of
    ``log(1 - A(z)/z**s) / (z (z - 1))`` over ``|z| = z_sp``."""

    def integrand(z):
        return np.log1p(-np.exp(log_ratio(p, z))) / (z - 1.0)

    n0 = max(4096, 64 * math.ceil(math.sqrt(p.s)))
    val, _ = circle_mean(integrand, z_sp, n0, tol)
    return val.real
