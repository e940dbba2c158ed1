"""Exact and quadrature-based reference values for the Gaussian walk.

For standard complex Gaussian steps (Re and Im independent N(0,1)) the pair
(B_n, B_n(theta)) / sqrt(2n) is a centered complex Gaussian vector with unit
variances and cross-covariance given by the normalized exponential sum

    D_n(theta) = (1/n) sum_{j=1..n} exp(2i*pi*j*theta),

so single tails are exactly n^(-alpha) at the threshold phi(n), and joint
tails reduce (after integrating out the common phase, which contributes a
modified Bessel I_0 factor) to a smooth two-dimensional radial integral

    P = 4/(1-d^2) * int_{r1,r2 > R} r1 r2 I_0(2 d r1 r2/(1-d^2))
        * exp(-(r1^2 + r2^2)/(1-d^2)) dr1 dr2,      d = |D_n(theta)|,

with R = sqrt(alpha log n).  The integral is evaluated on nested
Gauss-Legendre tensor grids until successive refinements agree to the
requested absolute tolerance; the last refinement gap is the reported error
estimate.  Radial truncation at R + 12 leaves Gaussian mass below 1e-30.

Time-increment tails use P(|Z| > t) = exp(-t^2 / (2 v)) for a complex
Gaussian Z whose components have variance v; for the gap between walk times
n1 < n2 the implemented variance is v = n2 - n1, the number of summed
steps (the floor-convention off-by-one is documented, not reproduced).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, log, pi, sqrt
from typing import Callable, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import i0e, roots_legendre

from .errors import DegenerateCovarianceError, DomainError
from .plateau import PlateauSpec, plateau_eval
from .walk import normalized_radius, threshold

_SIN_FALLBACK = 1e-8
_TRUNCATION = 12.0


@dataclass(frozen=True)
class PairCovariance:
    """Cross-covariance of the normalized pair (B_n, B_n(theta)) / sqrt(2n)."""

    n: int
    theta: float
    D: complex

    @property
    def absD(self) -> float:
        return min(abs(self.D), 1.0)


def dirichlet_kernel(n: int, theta: float) -> complex:
    """D_n(theta), closed geometric form with a direct-sum fallback near
    sin(pi*theta) = 0; |result| <= 1."""
    if n < 1:
        raise DomainError(f"dirichlet_kernel needs n >= 1, got {n}")
    theta = theta % 1.0
    s = np.sin(pi * theta)
    if abs(s) < _SIN_FALLBACK:
        j = np.arange(1, n + 1)
        return complex(np.exp(2j * pi * theta * j).sum() / n)
    return complex(np.exp(1j * pi * (n + 1) * theta) * np.sin(pi * n * theta) / (n * s))


def pair_covariance(n: int, theta: float) -> PairCovariance:
    return PairCovariance(n=n, theta=theta, D=dirichlet_kernel(n, theta))


def single_tail(n: int, alpha: float) -> float:
    """P(|B_n(theta)| > phi(n)) = n^(-alpha) exactly, independent of theta."""
    if n < 2:
        raise DomainError(f"single_tail needs n >= 2, got {n}")
    if not alpha > 0:
        raise DomainError(f"single_tail needs alpha > 0, got {alpha}")
    return exp(-alpha * log(n))


def joint_tail_envelope(n: int, theta: float, alpha: float) -> Tuple[float, float]:
    """Closed-form bracket around the joint tail:

    lower = (1-d)/(1+d) * n^(-2 alpha/(1-d)),
    upper = (1+d)/(1-d) * n^(-2 alpha/(1+d)),   d = |D_n(theta)|.
    """
    d = pair_covariance(n, theta).absD
    if d >= 1.0:
        raise DegenerateCovarianceError(f"|D_{n}({theta})| = 1: degenerate covariance")
    lower = (1.0 - d) / (1.0 + d) * exp(-2.0 * alpha / (1.0 - d) * log(n))
    upper = (1.0 + d) / (1.0 - d) * exp(-2.0 * alpha / (1.0 + d) * log(n))
    return lower, upper


def _joint_integrand(r1, r2, d):
    one_minus_d2 = 1.0 - d * d
    a = 2.0 * d / one_minus_d2 * r1 * r2
    expo = -((r1 - r2) ** 2 / one_minus_d2 + 2.0 / (1.0 + d) * r1 * r2)
    return 4.0 / one_minus_d2 * r1 * r2 * i0e(a) * np.exp(expo)


def joint_tail(
    n: int, theta: float, alpha: float, tol: float = 1e-10
) -> Tuple[float, float]:
    """Quadrature value of P(|B_n| > phi(n), |B_n(theta)| > phi(n)) and an
    absolute error estimate (gap of the last grid refinement)."""
    d = pair_covariance(n, theta).absD
    if d >= 1.0 - 1e-12:
        raise DegenerateCovarianceError(f"|D_{n}({theta})| ~ 1: degenerate covariance")
    r_lo = normalized_radius(alpha, n)
    r_hi = r_lo + _TRUNCATION
    prev = None
    err = np.inf
    for k in (40, 80, 160, 320):
        x, w = roots_legendre(k)
        r = 0.5 * (r_hi - r_lo) * x + 0.5 * (r_hi + r_lo)
        wr = 0.5 * (r_hi - r_lo) * w
        f = _joint_integrand(r[:, None], r[None, :], d)
        val = float(wr @ f @ wr)
        if prev is not None:
            err = abs(val - prev)
            if err <= tol:
                return val, err
        prev = val
    return prev, err


def smoothed_expectation(
    g, n: int, alpha: float, bound: float = 1.0
) -> Tuple[float, float]:
    """E g(|B_n| / phi(n)) = 2 int r g(r / R_n) exp(-r^2) dr, with error estimate.

    ``g`` is a PlateauSpec (integrated piecewise with an exact flat tail) or a
    bounded callable on the phi-normalized radius, integrated adaptively on
    [0, inf).  The reported quadrature error is <= 1e-10 in either case.
    """
    if not (np.isfinite(bound) and bound > 0):
        raise DomainError("smoothed_expectation needs a finite positive bound for g")
    r_n = normalized_radius(alpha, n)
    if isinstance(g, PlateauSpec):
        lo = max(g.m, 0.0) * r_n
        hi = (g.m + g.eps) * r_n
        val, err = quad(
            lambda r: 2.0 * r * plateau_eval(g, r / r_n) * exp(-r * r),
            lo,
            hi,
            epsabs=1e-12,
            limit=200,
        )
        return val + exp(-hi * hi), err
    fn: Callable[[float], float] = g
    val, err = quad(
        lambda r: 2.0 * r * fn(r / r_n) * exp(-r * r),
        0.0,
        np.inf,
        epsabs=1e-12,
        limit=200,
    )
    return val, err


def indicator_expectation(c: float, n: int, alpha: float) -> float:
    """Exact E 1{|B_n| > c * phi(n)} = n^(-alpha c^2); the g = indicator case."""
    if c < 0:
        raise DomainError(f"indicator threshold must be >= 0, got {c}")
    return exp(-alpha * c * c * log(n))


def derivative_variance(n: int, j: int) -> float:
    """Per-component variance of B_n^(j)(0): the exact sum of (2 pi r)^(2j),
    accumulated in exact integer arithmetic before the final float conversion."""
    if j < 1:
        raise DomainError(f"derivative order must be >= 1, got {j}")
    if n < 1:
        raise DomainError(f"derivative_variance needs n >= 1, got {n}")
    power_sum = sum(r ** (2 * j) for r in range(1, n + 1))
    scale = (2.0 * pi) ** (2 * j)
    try:
        return scale * float(power_sum)
    except OverflowError:
        # log-space assembly for values beyond float range
        return float("inf")


def complex_normal_abs_tail(v: float, t: float) -> float:
    """P(|Z| > t) = exp(-t^2/(2v)) for complex Z with component variance v."""
    if not v > 0:
        raise DomainError(f"variance must be > 0, got {v}")
    if t <= 0:
        return 1.0
    return exp(-t * t / (2.0 * v))


def time_increment_tail(n1: int, n2: int, eta: float, alpha: float) -> float:
    """P(|B_{n2} - B_{n1}| > (eta/2) phi(n1)) = exp(-eta^2 phi(n1)^2 / (8 (n2-n1))).

    The variance is the number of summed steps v = n2 - n1.
    """
    if n2 <= n1:
        raise DomainError(f"need n2 > n1, got {n1}, {n2}")
    if eta <= 0:
        return 1.0
    phi1 = threshold(alpha, n1)
    return complex_normal_abs_tail(float(n2 - n1), 0.5 * eta * phi1)
