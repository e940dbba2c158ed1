"""Monte Carlo tail estimation for general increments, plus analytic bounds.

All estimators share one replica-keyed stream convention (see ``mc``): the
estimate for a given (law, n, seed, replicas) is reproducible bit-for-bit
and independent of the worker count.  Thresholds are always m * sigma(law)
* phi(n), and smoothed statistics evaluate plateau functions at the
phi-normalized radius |S_n| / (sigma * phi(n)), so that a plateau with
offset m is the smooth surrogate of the indicator of {|S_n| > m sigma phi(n)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import mc
from .errors import DomainError, ParameterError, ThresholdTooSmallError
from .increments import IncrementLaw, sigma
from .plateau import PlateauSpec, plateau_eval  # noqa: F401  (re-exported)
from .walk import threshold


@dataclass(frozen=True)
class TailEstimate:
    """Monte Carlo probability (or smoothed mean) with its uncertainty."""

    p_hat: float
    replicas: int
    stderr: float
    ci95: Tuple[float, float]
    count: Optional[int] = None  # set for indicator frequencies

    def contains(self, value: float) -> bool:
        return self.ci95[0] <= value <= self.ci95[1]

    def upper95(self) -> float:
        """Exact (Clopper-Pearson) one-sided 97.5% upper bound on the
        probability; meaningful even at zero observed exceedances."""
        if self.count is None:
            raise DomainError("upper95 needs an indicator count")
        if self.count >= self.replicas:
            return 1.0
        from scipy.stats import beta

        return float(beta.ppf(0.975, self.count + 1, self.replicas - self.count))

    @staticmethod
    def from_count(count: int, replicas: int) -> "TailEstimate":
        p, se, ci = mc.count_estimate(count, replicas)
        return TailEstimate(p_hat=p, replicas=replicas, stderr=se, ci95=ci, count=count)

    @staticmethod
    def from_sums(total: float, total_sq: float, replicas: int) -> "TailEstimate":
        mean = total / replicas
        var = max(total_sq / replicas - mean * mean, 0.0)
        se = math.sqrt(var / replicas)
        return TailEstimate(
            p_hat=mean, replicas=replicas, stderr=se, ci95=(mean - 1.96 * se, mean + 1.96 * se)
        )


def mc_tail(
    law: IncrementLaw,
    n: int,
    alpha: float,
    replicas: int,
    seed: int,
    threads: int = 1,
    dtype=np.float64,
) -> TailEstimate:
    """Frequency of {|S_n| > sigma(law) * phi(n)}."""
    if replicas < 1:
        raise ParameterError("replicas must be >= 1")
    thr = sigma(law) * threshold(alpha, n)
    fn = mc.bind(mc.tail_block, law, n, thr, seed, dtype)
    counts = mc.run_blocks(fn, replicas, mc.auto_block_size(replicas, n), threads)
    return TailEstimate.from_count(sum(counts), replicas)


def mc_joint(
    law: IncrementLaw,
    n: int,
    theta: float,
    alpha: float,
    replicas: int,
    seed: int,
    threads: int = 1,
    dtype=np.float64,
) -> TailEstimate:
    """Frequency of {|S_n| > sigma phi(n)} and {|S_n(theta)| > sigma phi(n)}
    from a single increment stream per replica."""
    if not 0.0 <= theta < 1.0:
        raise DomainError(f"theta must lie in [0, 1), got {theta}")
    if theta == 0.0:
        return mc_tail(law, n, alpha, replicas, seed, threads, dtype)
    thr = sigma(law) * threshold(alpha, n)
    fn = mc.bind(mc.joint_block, law, n, (theta,), thr, seed, dtype)
    results = mc.run_blocks(fn, replicas, mc.auto_block_size(replicas, n), threads)
    joint = sum(int(j[0]) for _, j in results)
    return TailEstimate.from_count(joint, replicas)


@dataclass(frozen=True)
class DecorrelationRow:
    theta: float
    single_base: TailEstimate
    single_theta: TailEstimate
    joint: TailEstimate
    diff: float          # p_joint - p_base * p_theta (plug-in)
    diff_stderr: float   # batch-means standard error of the difference
    ratio: Optional[float]  # |diff| * n^(2 alpha) * n theta / log n

    @property
    def abs_diff(self) -> float:
        return abs(self.diff)

    @property
    def diff_ci95(self) -> Tuple[float, float]:
        return (self.diff - 1.96 * self.diff_stderr, self.diff + 1.96 * self.diff_stderr)


def decorrelation_curve(
    law: IncrementLaw,
    n: int,
    alpha: float,
    thetas: Sequence[float],
    replicas: int,
    seed: int,
    threads: int = 1,
    dtype=np.float64,
) -> List[DecorrelationRow]:
    """Per-theta |joint - product of singles| with batch-means CIs, using
    common random numbers across all angles (one stream, many phases)."""
    thetas = tuple(thetas)
    if not thetas or not all(0.0 < t <= 0.5 for t in thetas):
        raise DomainError("thetas must be in (0, 1/2]")
    thr = sigma(law) * threshold(alpha, n)
    fn = mc.bind(mc.joint_block, law, n, thetas, thr, seed, dtype)
    block = mc.auto_block_size(replicas, n, min_blocks=min(50, replicas))
    results = mc.run_blocks(fn, replicas, block, threads)
    bounds = mc.block_bounds(replicas, block)
    singles = np.sum([s for s, _ in results], axis=0, dtype=np.int64)
    joints = np.sum([j for _, j in results], axis=0, dtype=np.int64)

    # batch means over equal-size blocks (drop a ragged final block)
    sizes = np.array([b1 - b0 for b0, b1 in bounds], dtype=np.float64)
    full = sizes == sizes[0]
    s_blocks = np.array([s for s, _ in results], dtype=np.float64)[full] / sizes[0]
    j_blocks = np.array([j for _, j in results], dtype=np.float64)[full] / sizes[0]
    d_blocks = j_blocks - s_blocks[:, :1] * s_blocks[:, 1:]
    nb = d_blocks.shape[0]
    se = (
        d_blocks.std(axis=0, ddof=1) / math.sqrt(nb)
        if nb >= 2
        else np.full(len(thetas), np.nan)
    )

    base = TailEstimate.from_count(int(singles[0]), replicas)
    rows = []
    for k, theta in enumerate(thetas):
        single_k = TailEstimate.from_count(int(singles[k + 1]), replicas)
        joint_k = TailEstimate.from_count(int(joints[k]), replicas)
        diff = joint_k.p_hat - base.p_hat * single_k.p_hat
        ratio = abs(diff) * n ** (2 * alpha) * n * theta / math.log(n)
        rows.append(
            DecorrelationRow(
                theta=theta,
                single_base=base,
                single_theta=single_k,
                joint=joint_k,
                diff=diff,
                diff_stderr=float(se[k]),
                ratio=ratio,
            )
        )
    return rows


def mc_smoothed(
    law: IncrementLaw,
    n: int,
    spec: PlateauSpec,
    alpha: float,
    replicas: int,
    seed: int,
    threads: int = 1,
    dtype=np.float64,
) -> TailEstimate:
    """Mean of p_{m,eps}(|S_n| / (sigma phi(n))) with CI."""
    if replicas < 1:
        raise ParameterError("replicas must be >= 1")
    scale = sigma(law) * threshold(alpha, n)
    fn = mc.bind(mc.smoothed_block, law, n, spec, scale, seed, dtype)
    results = mc.run_blocks(fn, replicas, mc.auto_block_size(replicas, n), threads)
    total = mc.fsum_blocks([s for s, _ in results])
    total_sq = mc.fsum_blocks([s2 for _, s2 in results])
    return TailEstimate.from_sums(total, total_sq, replicas)


# ---------------------------------------------------------------------------
# analytic bound calculators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BernsteinParams:
    """Inputs of the classical Bernstein inequality for bounded summands."""

    variance_sum: float  # sum of E X_i^2
    M: float             # a.s. bound on |X_i|
    t: float

    def __post_init__(self):
        if self.variance_sum < 0 or not self.M > 0 or self.t < 0:
            raise ParameterError("need variance_sum >= 0, M > 0, t >= 0")


def bernstein_bound(params: BernsteinParams) -> float:
    """exp(-(t^2/2) / (variance_sum + M t / 3))."""
    denom = params.variance_sum + params.M * params.t / 3.0
    if denom == 0.0:
        return 1.0
    return math.exp(-(params.t * params.t / 2.0) / denom)


@dataclass(frozen=True)
class DirectionalParams:
    """Directional discretization of a modulus tail into d_n half-plane events."""

    n: int
    alpha: float
    m: float
    d_n: int
    K_n: float

    @property
    def psi(self) -> float:
        return (self.m * threshold(self.alpha, self.n) - self.K_n) * math.cos(
            math.pi / self.d_n
        )


def directional_params(
    n: int, alpha: float, m: float, d_n: Optional[int] = None, K_n: Optional[float] = None
) -> DirectionalParams:
    """Fill in the default discretization d_n = log n, K_n = log^2 n."""
    log_n = math.log(n)
    if d_n is None:
        d_n = max(3, round(log_n))
    if K_n is None:
        K_n = log_n * log_n
    if d_n < 3:
        raise ParameterError(f"d_n must be >= 3, got {d_n}")
    return DirectionalParams(n=n, alpha=alpha, m=m, d_n=d_n, K_n=K_n)


_TRUNCATION_C = 10.0  # documented conservative constant for the truncation term


def directional_bound_terms(law: IncrementLaw, params: DirectionalParams):
    """(Bernstein term, truncation term) of the directional majorant for
    P(|S'| > m phi(n) - K_n), S' a sum of n unit-variance rotationally
    symmetric components."""
    psi = params.psi
    if psi <= 0:
        raise ThresholdTooSmallError(
            f"psi(n) = {psi:.3g} <= 0: threshold too small for K_n = {params.K_n}"
        )
    # Bernstein with variance_sum = n (unit-variance components) and M = K_n;
    # written out directly so K_n = 0 degenerates to the pure sub-gaussian form
    bern = params.d_n * math.exp(-(psi * psi / 2.0) / (params.n + psi * params.K_n / 3.0))
    trunc = _TRUNCATION_C * params.n * math.exp(-law.kappa * params.K_n)
    return bern, trunc


def directional_bound(
    law: IncrementLaw,
    n: int,
    alpha: float,
    m: float,
    d_n: Optional[int] = None,
    K_n: Optional[float] = None,
) -> float:
    """Analytic majorant d_n exp(-(psi^2/2)/(n + psi K_n/3)) + C n exp(-kappa K_n)."""
    params = directional_params(n, alpha, m, d_n, K_n)
    bern, trunc = directional_bound_terms(law, params)
    return bern + trunc
