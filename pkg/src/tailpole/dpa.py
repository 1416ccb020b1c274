"""Dominant-pole tail approximations and the pieces needed to check them.

``P(Q > N)`` is approximated by the residue term of the dominant pole ``Z0``
(optionally plus the conjugate pairs ``Z_{+-1}, ..., Z_{+-M}``). Front
factors ``c_k / (1 - Z_k)`` come either exactly from the interior zeros or
from the saddle-point integral ``J`` and the zeta series.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import quad

from . import distkit, grw
from ._quad import circle_mean
from .errors import DomainError, InputError, NumericalError, OnContour, PoleHit
from .roots import PoleSet, log_ratio
from .scaling import SystemParams, asym_exterior_zero

IMAG_CANARY = 1e-10


class FrontMethod(str, Enum):
    EXACT_PRODUCT = "exact_product"
    ZETA_APPROX = "zeta_approx"
    J_INTEGRAL_APPROX = "j_integral_approx"


class TailMethod(str, Enum):
    EXACT_ORACLE = "exact"
    DPA_LEADING = "dpa"
    DPA_CORRECTED = "corrected"
    GRW_LIMIT = "grw"


@dataclass(frozen=True)
class SaddleData:
    z_sp: float
    B: float
    eta: float


@dataclass(frozen=True)
class FrontFactor:
    k: int
    value: complex
    method: FrontMethod


@dataclass(frozen=True, eq=False)
class ContourSpec:
    x0: float
    y0: float
    xi: float
    R: float
    segment_points: np.ndarray
    arc_points: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.segment_points, self.arc_points])

    @property
    def eta0(self) -> float:
        """Half-height of the segment, ``Im`` of the join points."""
        return float(self.segment_points[-1].imag)

    def encloses(self, z: complex) -> bool:
        """True if ``z`` lies inside the closed curve."""
        return abs(z) < self.R and (z.real < self.xi or abs(z) < self.xi)


@dataclass(frozen=True)
class TailEstimate:
    N: int
    method: TailMethod
    value: float
    M: int | None = None

    @property
    def suspicious(self) -> bool:
        # approximations may overshoot [0, 1] slightly; far outside is a bug
        return not -1e-12 <= self.value <= 1.5


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_CANARY * max(1.0, abs(z.real)):
        raise NumericalError(f"{what} should be real; imaginary part {z.imag:.3e}")
    return z.real


def saddle_data(p: SystemParams, z_sp: float) -> SaddleData:
    x, dx, d2x = (complex(v).real for v in distkit.pgf_derivs(p.dist, z_sp))
    log_b = p.n * math.log(x) - p.s * math.log(z_sp)
    eta = 1.0 / z_sp**2 + (p.n / p.s) * (d2x / x - (dx / x) ** 2)
    return SaddleData(z_sp=float(z_sp), B=math.exp(log_b), eta=eta)


def _integral_start_nodes(p: SystemParams) -> int:
    return max(4096, 64 * math.ceil(math.sqrt(p.s)))


def contour_I(p: SystemParams, Z: complex, z_sp: float, tol: float = 1e-9) -> complex:
    """``(1/2 pi i) * contour integral of log(1 - A(z)/z**s) / (Z - z) dz``
    over ``|z| = z_sp``, by the trapezoidal rule."""
    Z = complex(Z)
    if abs(abs(Z) - z_sp) < 1e-12 * z_sp:
        raise OnContour(f"Z = {Z} lies on the integration circle |z| = {z_sp}")

    def integrand(z):
        return np.log1p(-np.exp(log_ratio(p, z))) * z / (Z - z)

    val, _ = circle_mean(integrand, z_sp, _integral_start_nodes(p), tol)
    return val


def _fsum_complex(terms: np.ndarray) -> complex:
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def log_P(p: SystemParams, poles: PoleSet, Z: complex) -> complex:
    """``sum_j Log(1 - z_j/Z)`` over the interior zeros ``j = 1..s-1``.

    For real ``Z`` the imaginary parts cancel in conjugate pairs and the sum
    is returned as exactly real.
    """
    Z = complex(Z)
    if abs(Z) < 1.0:
        raise InputError("log_P needs |Z| >= 1")
    zj = poles.interior_values()
    if zj.size == 0:
        return 0j
    if np.min(np.abs(zj - Z)) < 1e-14:
        raise PoleHit(f"Z = {Z} coincides with an interior zero")
    terms = np.log(1.0 - zj / Z)
    if Z.imag == 0.0:
        return complex(math.fsum(terms.real), 0.0)
    return _fsum_complex(terms)


@dataclass(frozen=True)
class ProductIdentityCheck:
    direct: complex
    via_integral: complex
    difference: complex


def product_identity_check(p: SystemParams, poles: PoleSet, Z: complex,
                           z_sp: float) -> ProductIdentityCheck:
    """Compare ``log_P(Z)`` with its contour-integral form (three cases:
    ``Z = 1``, ``1 < |Z| < z_sp``, ``|Z| > z_sp``). The difference is
    reduced modulo ``2 pi i``."""
    Z = complex(Z)
    direct = log_P(p, poles, Z)
    I = contour_I(p, Z, z_sp)
    if Z == 1:
        via = math.log(p.gamma * math.sqrt(p.s)) + I
    else:
        via = -cmath.log(1.0 - 1.0 / Z) + I
        if abs(Z) < z_sp:
            via += cmath.log(-np.expm1(complex(log_ratio(p, Z))))
    diff = direct - via
    diff = complex(diff.real, (diff.imag + math.pi) % (2 * math.pi) - math.pi)
    return ProductIdentityCheck(direct, via, diff)


def _log_prefactor_ratio(p: SystemParams, Z: complex) -> complex:
    """Log of ``-(s - mu_A) / (s Z^{s-1} - A'(Z)) * Z^{s-1}`` at a zero ``Z``.

    Uses ``A(Z) = Z**s`` so that ``A'(Z) = Z**s * n X'(Z)/X(Z)`` and the
    powers ``Z**(s-1)`` cancel.
    """
    x, dx, _ = distkit.pgf_derivs(p.dist, Z)
    denom = p.s - p.n * Z * complex(dx) / complex(x)
    return cmath.log(-(p.s - p.mu_A) / denom)


def pole_prefactor_ratio(p: SystemParams, Z0: float) -> float:
    """``-(s - mu_A) / (s Z0^{s-1} - A'(Z0)) * Z0^{s-1}``; tends to 1."""
    return _real(cmath.exp(_log_prefactor_ratio(p, complex(Z0))), "pole prefactor ratio")


def front_factor_exact(p: SystemParams, poles: PoleSet, k: int) -> FrontFactor:
    """``c_k / (1 - Z_k)`` from the product over all interior zeros."""
    Z = poles.Z(k)
    log_val = _log_prefactor_ratio(p, Z) + log_P(p, poles, Z) - log_P(p, poles, 1.0)
    val = cmath.exp(log_val)
    if k == 0:
        val = complex(_real(val, "front factor c_0/(1 - Z_0)"), 0.0)
        if val.real <= 0:
            raise NumericalError("dominant front factor is not positive")
    return FrontFactor(k, val, FrontMethod.EXACT_PRODUCT)


def j_integral(sd: SaddleData, d: complex, rtol: float = 1e-10) -> complex:
    """``(1/pi) int_0^inf d/(t^2 + d^2) log(1 - B exp(-t^2)) dt``."""
    d = complex(d)
    if d.real <= 0:
        raise DomainError(f"J(d) needs Re d > 0, got d = {d}")
    t_max = math.sqrt(max(math.log(sd.B) + 37.0, 1.0))
    B = sd.B

    def f(t):
        return d / (t * t + d * d) * math.log1p(-B * math.exp(-t * t))

    kw = dict(epsabs=1e-15, epsrel=rtol, limit=400)
    re, _ = quad(lambda t: f(t).real, 0.0, t_max, **kw)
    im, _ = quad(lambda t: f(t).imag, 0.0, t_max, **kw) if d.imag else (0.0, 0.0)
    return complex(re, im) / math.pi


def d_hat(p: SystemParams, k: int) -> complex:
    return cmath.sqrt(p.b0 * p.b0 - 2j * math.pi * k)


def front_factor_approx(p: SystemParams, sd: SaddleData, k: int) -> FrontFactor:
    """Saddle-point approximation ``exp(J(d_k) + J(d_0)) / (2 d_k (d_k + d_0))``."""
    dk = d_hat(p, k)
    d0 = complex(p.b0)
    val = cmath.exp(j_integral(sd, dk) + j_integral(sd, d0)) / (2.0 * dk * (dk + d0))
    if k == 0:
        val = complex(val.real, 0.0)
    return FrontFactor(k, val, FrontMethod.J_INTEGRAL_APPROX)


def zeta_front_factor(p: SystemParams) -> float:
    """Limit of ``c_0 / (1 - Z_0)``: ``exp((2 b0/sqrt(pi)) * zeta_series(b0^2))``.

    Same series as :func:`tailpole.grw.h_beta` at ``beta = sqrt(2) b0``.
    """
    if not p.b0 < math.sqrt(2.0 * math.pi):
        raise DomainError(f"b0 = {p.b0} is outside the series domain b0 < sqrt(2 pi)")
    return math.exp(2.0 * p.b0 / math.sqrt(math.pi) * grw.zeta_series(p.b0 * p.b0))


def _pole_term(ff: FrontFactor, Z: complex, N: int) -> complex:
    return cmath.exp(cmath.log(ff.value) - (N + 1) * cmath.log(Z))


def tail_dpa(p: SystemParams, ff0: FrontFactor, Z0: float, N: int) -> TailEstimate:
    """Dominant-pole term ``c_0 / ((1 - Z_0) Z_0^{N+1})``."""
    if N < 0:
        raise InputError("N must be nonnegative")
    val = math.exp(math.log(ff0.value.real) - (N + 1) * math.log(Z0))
    return TailEstimate(N, TailMethod.DPA_LEADING, val)


def corrected_terms(p: SystemParams, poles: PoleSet, N: int, M: int,
                    front: dict[int, FrontFactor] | None = None) -> list[complex]:
    """Pole contributions ``c_k / ((1 - Z_k) Z_k^{N+1})`` for ``k = 0..M``
    (the ``k >= 1`` entries still need doubling and ``Re``)."""
    if M > poles.k_max:
        raise InputError(f"M = {M} exceeds the computed k_max = {poles.k_max}")
    front = front or {}
    out = []
    for k in range(M + 1):
        ff = front.get(k) or front_factor_exact(p, poles, k)
        out.append(_pole_term(ff, poles.Z(k), N))
    return out


def tail_corrected(p: SystemParams, poles: PoleSet, N: int, M: int,
                   front: dict[int, FrontFactor] | None = None) -> TailEstimate:
    """``Re[sum_{|k| <= M} c_k / ((1 - Z_k) Z_k^{N+1})]`` with exact front
    factors. ``M = 0`` reproduces :func:`tail_dpa` bit for bit."""
    front = dict(front or {})
    if 0 not in front:
        front[0] = front_factor_exact(p, poles, 0)
    total = complex(tail_dpa(p, front[0], poles.Z0, N).value)
    for k in range(1, M + 1):
        for kk in (k, -k):
            ff = front.get(kk) or front_factor_exact(p, poles, kk)
            total += _pole_term(ff, poles.Z(kk), N)
    val = _real(total, "corrected tail series")
    return TailEstimate(N, TailMethod.DPA_CORRECTED, val, M=M)


def build_contour_K(p: SystemParams, points: int = 1024) -> ContourSpec:
    """Segment ``Re z = xi`` capped by an arc of ``|z| = R``.

    ``xi = Re Zhat(1/2)`` sits midway between the dominant pole and its first
    neighbours; ``y0`` fixes where the segment meets the circle. Traversed
    counterclockwise, starting at the lower join.
    """
    if points < 2:
        raise InputError("need at least 2 points per piece")
    a0, b0, rs = p.a0, p.b0, p.sqrt_s
    x0 = (a0 * (cmath.sqrt(b0 * b0 + 1j * math.pi) - b0)).real
    y0 = math.sqrt(2.0 * p.d0 + 2.0 * x0 * x0)
    xi = asym_exterior_zero(p, 0.5).real
    eta0 = y0 / rs
    R = math.sqrt(xi * xi + eta0 * eta0)
    # odd count so the real-axis crossing, where the bound is tightest, is sampled
    seg = xi + 1j * np.linspace(-eta0, eta0, points | 1)
    th0 = math.atan2(eta0, xi)
    theta = np.linspace(th0, 2.0 * math.pi - th0, points)
    arc = R * np.exp(1j * theta)
    # pin the joins so segment and arc meet exactly
    arc[0] = seg[-1]
    arc[-1] = seg[0]
    return ContourSpec(x0=x0, y0=y0, xi=xi, R=R, segment_points=seg, arc_points=arc)


def bound_ratios(p: SystemParams, ks: ContourSpec) -> np.ndarray:
    """``|1 - A(z)/z**s|`` at each contour sample (segment first, then arc)."""
    return np.abs(-np.expm1(log_ratio(p, ks.points)))


def bound_check_K(p: SystemParams, ks: ContourSpec) -> float:
    """Smallest ``|1 - A(z)/z**s|`` over the sampled contour."""
    return float(np.min(bound_ratios(p, ks)))
