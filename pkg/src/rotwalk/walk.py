"""Evaluation of the coupled walk S_n(theta) = sum_j U_j exp(2i*pi*j*theta).

The dyadic-grid evaluator folds the increments modulo 2^m before a single
FFT, turning the naive O(n * 2^m) sweep into O(n + 2^m * m).  Thresholds
phi(n) = sqrt(2 * alpha * n * log n) and the geometric time schedule
floor(q^k) live here as well because everything downstream (oracles, Monte
Carlo, trees) consumes them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from math import log, sqrt
from typing import IO, Sequence

import numpy as np

from .errors import DomainError, ParameterError


def threshold(alpha: float, n: int) -> float:
    """phi(n) = sqrt(2 * alpha * n * log n); requires n >= 2 and alpha > 0."""
    if n < 2:
        raise DomainError(f"threshold needs n >= 2 (log n <= 0 at n = {n})")
    if not alpha > 0:
        raise DomainError(f"threshold needs alpha > 0, got {alpha}")
    return sqrt(2.0 * alpha * n * log(n))


def normalized_radius(alpha: float, n: int) -> float:
    """R_n = phi(n) / sqrt(2n) = sqrt(alpha * log n)."""
    if n < 2:
        raise DomainError(f"normalized_radius needs n >= 2, got {n}")
    if not alpha > 0:
        raise DomainError(f"normalized_radius needs alpha > 0, got {alpha}")
    return sqrt(alpha * log(n))


@dataclass(frozen=True)
class ThresholdSpec:
    """Threshold family phi(n) at a fixed exceedance exponent alpha."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")

    def phi(self, n: int) -> float:
        return threshold(self.alpha, n)

    def radius(self, n: int) -> float:
        return normalized_radius(self.alpha, n)


def phases(n: int, theta: float) -> np.ndarray:
    """exp(2i*pi*j*theta) for j = 1..n."""
    return np.exp(2j * np.pi * theta * np.arange(1, n + 1))


def eval_point(increments: Sequence[complex], theta: float) -> complex:
    """S_n(theta) by direct phase accumulation; theta is reduced mod 1."""
    u = np.asarray(increments)
    if u.size == 0:
        raise DomainError("eval_point needs at least one increment")
    theta = theta % 1.0
    return complex(np.dot(u, phases(u.size, theta)))


def eval_derivative(increments: Sequence[complex], order: int, theta: float) -> complex:
    """j-th theta-derivative sum_r U_r (2i*pi*r)^j exp(2i*pi*r*theta)."""
    if order == 0:
        return eval_point(increments, theta)
    if order < 0 or order > 8:
        raise DomainError(f"derivative order must be in 0..8, got {order}")
    u = np.asarray(increments)
    if u.size == 0:
        raise DomainError("eval_derivative needs at least one increment")
    theta = theta % 1.0
    r = np.arange(1, u.size + 1)
    return complex(np.dot(u * (2j * np.pi * r) ** order, np.exp(2j * np.pi * theta * r)))


@dataclass(frozen=True)
class DyadicGrid:
    """Values of S_n at all dyadic angles i / 2^depth (left interval endpoints)."""

    depth: int
    n: int
    values: np.ndarray  # complex, length 2**depth

    def theta(self, i: int) -> float:
        return i / 2.0**self.depth

    def moduli(self) -> np.ndarray:
        return np.abs(self.values)


def fold_mod(increments: np.ndarray, m: int) -> np.ndarray:
    """c_r = sum of U_j over j = 1..n with j = r (mod 2^m), r = 0..2^m - 1."""
    size = 1 << m
    u = np.asarray(increments, dtype=np.complex128)
    n = u.size
    # place U_j at flat index j (so residues line up), pad to a multiple of 2^m
    rows = (n + size) // size
    buf = np.zeros(rows * size, dtype=np.complex128)
    buf[1 : n + 1] = u
    return buf.reshape(rows, size).sum(axis=0)


def eval_grid_fft(increments: Sequence[complex], depth: int) -> DyadicGrid:
    """Fold-and-FFT evaluation of S_n on the depth-m dyadic grid.

    values[i] = sum_r c_r exp(+2i*pi*r*i/2^m), i.e. 2^m * ifft(c).
    """
    if depth < 0:
        raise DomainError(f"depth must be >= 0, got {depth}")
    u = np.asarray(increments, dtype=np.complex128)
    if u.size == 0:
        raise DomainError("eval_grid_fft needs at least one increment")
    size = 1 << depth
    c = fold_mod(u, depth)
    values = np.fft.ifft(c) * size
    return DyadicGrid(depth=depth, n=u.size, values=values)


def sup_window(
    increments: Sequence[complex],
    theta0: float,
    eps: float,
    resolution: int,
    with_correction: bool = False,
):
    """Grid maximum of |S_n(theta) - S_n(theta0)| over theta in [theta0, theta0+eps].

    A lower bound for the continuous sup.  With ``with_correction`` the pair
    (grid value, grid value + Lipschitz slack) is returned, the slack being
    max_grid |S_n'| * eps / (resolution - 1).
    """
    if eps <= 0:
        raise DomainError(f"window width must be > 0, got {eps}")
    if resolution < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution}")
    u = np.asarray(increments, dtype=np.complex128)
    thetas = np.linspace(theta0, theta0 + eps, resolution)
    r = np.arange(1, u.size + 1)
    ph = np.exp(2j * np.pi * np.outer(thetas, r))
    vals = ph @ u
    grid_sup = float(np.max(np.abs(vals - vals[0])))
    if not with_correction:
        return grid_sup
    deriv = ph @ (u * (2j * np.pi * r))
    slack = float(np.max(np.abs(deriv))) * eps / (resolution - 1)
    return grid_sup, grid_sup + slack


@dataclass(frozen=True)
class TimeSchedule:
    """Geometric sampling times floor(q^k), duplicates collapsed.

    ``level_of`` maps each original exponent k to its index in ``times``.
    Floors are computed through exact rational arithmetic so that q^k near an
    integer can never round the wrong way.
    """

    q: float
    max_level: int
    times: tuple = field(init=False)
    level_of: tuple = field(init=False)

    def __post_init__(self):
        if not self.q > 1:
            raise ParameterError(f"q must be > 1, got {self.q}")
        if self.max_level < 0:
            raise ParameterError(f"max_level must be >= 0, got {self.max_level}")
        base = Fraction(self.q)
        times, level_of = [], []
        power = Fraction(1)
        for _ in range(self.max_level + 1):
            t = int(power)  # exact floor of an exact rational
            if not times or t > times[-1]:
                times.append(t)
            level_of.append(len(times) - 1)
            power *= base
        object.__setattr__(self, "times", tuple(times))
        object.__setattr__(self, "level_of", tuple(level_of))

    def time_at(self, level: int) -> int:
        """floor(q^level)."""
        return self.times[self.level_of[level]]


def floor_power(q: float, k: int) -> int:
    """Exact floor(q^k) for float q, via rational arithmetic."""
    if not q > 1:
        raise ParameterError(f"q must be > 1, got {q}")
    return int(Fraction(q) ** k)


def dump_grid_csv(grid: DyadicGrid, fh: IO[str]) -> None:
    """Grid dump: CSV columns (i, theta, re, im, modulus), header mandatory."""
    w = csv.writer(fh)
    w.writerow(["i", "theta", "re", "im", "modulus"])
    for i, v in enumerate(grid.values):
        w.writerow(
            [i, repr(grid.theta(i)), repr(float(v.real)), repr(float(v.imag)),
             repr(float(abs(v)))]
        )
