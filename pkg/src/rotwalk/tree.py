"""Dyadic trees with circled vertices, dimension proxies, Frostman measures.

Vertex i at level n owns the angle interval [i 2^-n, (i+1) 2^-n) and is
marked from the walk value at the interval's left endpoint and time
floor(q^n).  One increment stream is shared by all levels of a tree
(prefix-consistent), so deepening a tree never changes shallow marks.
Level 0 and any level with floor(q^n) < 2 carry no marks (phi degenerates
there); the first marked level is the smallest n with floor(q^n) >= 2.

Dimension is estimated at finite depth by the least-squares slope of
log2(mean circled count) against the level, and from below by Frostman
measures built by proportional mass splitting along subtree sums, whose
finite gamma-energy certifies dimension >= gamma.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import IO, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import mc
from .errors import (
    DomainError,
    ParameterError,
    ScheduleRejectedError,
    UndefinedSlopeError,
)
from .increments import IncrementLaw, SeedSpec, sample_increments, sigma
from .plateau import PlateauSpec, plateau_eval
from .walk import TimeSchedule, eval_grid_fft, threshold


@dataclass(frozen=True)
class TreeConfig:
    """Sampling scheme of one circled tree.

    ``plateau`` = None marks with the indicator of |S| > sigma * phi;
    otherwise Z_v = p_{m,eps}(|S| / (sigma * phi)) in [0, 1].
    """

    q: float
    max_depth: int
    alpha: float
    plateau: Optional[PlateauSpec] = None

    def __post_init__(self):
        if not self.q > 1:
            raise ParameterError(f"q must be > 1, got {self.q}")
        if self.max_depth < 1:
            raise ParameterError(f"max_depth must be >= 1, got {self.max_depth}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")

    def schedule(self) -> TimeSchedule:
        return TimeSchedule(q=self.q, max_level=self.max_depth)


@dataclass
class CircledTree:
    """Per-level mark arrays (2^n values in [0,1]) plus provenance."""

    config: TreeConfig
    law: object
    seed: SeedSpec
    marks: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def first_level(self) -> int:
        return min(self.marks) if self.marks else -1

    def levels(self) -> List[int]:
        return sorted(self.marks)

    def marks_at(self, level: int) -> np.ndarray:
        if level not in self.marks:
            raise DomainError(f"level {level} carries no marks")
        return self.marks[level]


def build_tree(law: IncrementLaw, config: TreeConfig, seed: SeedSpec) -> CircledTree:
    """Mark all levels of a tree from one shared increment stream."""
    schedule = config.schedule()
    t_max = schedule.time_at(config.max_depth)
    increments = sample_increments(law, max(t_max, 1), seed)
    sig = sigma(law)
    tree = CircledTree(config=config, law=law, seed=seed)
    for level in range(1, config.max_depth + 1):
        t = schedule.time_at(level)
        if t < 2:
            continue
        grid = eval_grid_fft(increments[:t], level)
        radius = grid.moduli()
        scale = sig * threshold(config.alpha, t)
        if config.plateau is None:
            tree.marks[level] = (radius > scale).astype(np.float64)
        else:
            tree.marks[level] = plateau_eval(config.plateau, radius / scale)
    return tree


def _forest_block(law, config, master_seed, r0, r1):
    return [build_tree(law, config, SeedSpec(master_seed, i)).marks for i in range(r0, r1)]


def build_forest(
    law: IncrementLaw,
    config: TreeConfig,
    master_seed: int,
    n_trees: int,
    threads: int = 1,
) -> List[CircledTree]:
    """n_trees independent trees; tree i uses the stream (master_seed, i)."""
    fn = mc.bind(_forest_block, law, config, master_seed)
    block = max(1, -(-n_trees // max(threads, 1) // 4))
    results = mc.run_blocks(fn, n_trees, block, threads)
    trees = []
    i = 0
    for chunk in results:
        for marks in chunk:
            trees.append(
                CircledTree(config=config, law=law, seed=SeedSpec(master_seed, i), marks=marks)
            )
            i += 1
    return trees


def subtree_sum(tree: CircledTree, level_u: int, index_u: int, level_n: int) -> float:
    """M_n(u): sum of level-n marks over descendants of vertex (level_u, index_u)."""
    if level_n < level_u:
        raise DomainError(f"target level {level_n} above vertex level {level_u}")
    if not 0 <= index_u < (1 << level_u):
        raise DomainError(f"vertex index {index_u} out of range at level {level_u}")
    marks = tree.marks_at(level_n)
    span = 1 << (level_n - level_u)
    return float(marks[index_u * span : (index_u + 1) * span].sum())


def root_sum(tree: CircledTree, level: int) -> float:
    """M_n(root) = sum of all marks at the level."""
    return float(tree.marks_at(level).sum())


def count_circled(tree: CircledTree, level: int) -> int:
    """Number of vertices with Z_v > 0 at the level."""
    return int(np.count_nonzero(tree.marks_at(level) > 0.0))


@dataclass(frozen=True)
class MomentStats:
    level: int
    p_hat: float      # empirical P(Z_v > 0)
    m_hat: float      # empirical E(Z_v)
    var_ratio: float  # Var(M_n(root)) / (2^n * m_hat)


def moment_stats(forest: Sequence[CircledTree], level: int) -> MomentStats:
    all_marks = np.concatenate([t.marks_at(level) for t in forest])
    p_hat = float(np.mean(all_marks > 0.0))
    m_hat = float(np.mean(all_marks))
    sums = np.array([root_sum(t, level) for t in forest])
    expected = m_hat * (1 << level)
    var_ratio = float(sums.var(ddof=1) / expected) if expected > 0 else math.nan
    return MomentStats(level=level, p_hat=p_hat, m_hat=m_hat, var_ratio=var_ratio)


def variance_ratio_profile(
    forest: Sequence[CircledTree], levels: Sequence[int]
) -> Tuple[Dict[int, float], List[int]]:
    """Per-level Var(M_n(root)) / E(M_n(root)); returns (ratios, skipped levels)."""
    if len(forest) < 2:
        raise ParameterError("variance ratio needs at least 2 trees")
    ratios: Dict[int, float] = {}
    skipped: List[int] = []
    for level in levels:
        stats = moment_stats(forest, level)
        if stats.m_hat == 0.0:
            skipped.append(level)
        else:
            ratios[level] = stats.var_ratio
    return ratios, skipped


def mean_counts(forest: Sequence[CircledTree], levels: Sequence[int]) -> np.ndarray:
    return np.array(
        [np.mean([count_circled(t, lv) for t in forest]) for lv in levels], dtype=float
    )


def dimension_slope(
    counts: Sequence[float], levels: Sequence[int]
) -> Tuple[float, float]:
    """Least-squares slope of log2(mean count) against level, with its SE.

    For a Gaussian indicator tree the population slope is 1 - alpha log2 q
    (up to floor(q^n) rounding); for synthetic Bernoulli(2^-n beta) marks
    it is 1 - beta.
    """
    counts = np.asarray(counts, dtype=float)
    levels = np.asarray(levels, dtype=float)
    keep = counts > 0
    if not keep.any():
        raise UndefinedSlopeError("all level counts are zero")
    x, y = levels[keep], np.log2(counts[keep])
    if x.size < 4:
        raise UndefinedSlopeError(f"only {x.size} levels with nonzero counts (< 4)")
    xbar = x.mean()
    sxx = float(((x - xbar) ** 2).sum())
    slope = float(((x - xbar) * y).sum() / sxx)
    resid = y - (y.mean() + slope * (x - xbar))
    se = math.sqrt(float((resid**2).sum()) / (x.size - 2) / sxx)
    return slope, se


def bernoulli_forest(
    beta: float, max_depth: int, master_seed: int, n_trees: int, first_level: int = 1
) -> List[CircledTree]:
    """Synthetic forests with independent Bernoulli(2^-n beta) indicator marks:
    the walk-free oracle for the tree machinery."""
    if not 0 < beta:
        raise ParameterError(f"beta must be > 0, got {beta}")
    config = TreeConfig(q=2.0, max_depth=max_depth, alpha=beta)  # placeholder provenance
    trees = []
    for i in range(n_trees):
        gen = SeedSpec(master_seed, i).generator()
        marks = {
            level: (gen.random(1 << level) < 2.0 ** (-level * beta)).astype(np.float64)
            for level in range(first_level, max_depth + 1)
        }
        trees.append(
            CircledTree(config=config, law=None, seed=SeedSpec(master_seed, i), marks=marks)
        )
    return trees


# ---------------------------------------------------------------------------
# Frostman measure and gamma-energy
# ---------------------------------------------------------------------------

@dataclass
class DyadicMeasure:
    """Masses per dyadic interval, recorded at every level base..top."""

    base_level: int
    masses: Dict[int, np.ndarray]

    @property
    def top_level(self) -> int:
        return max(self.masses)

    def mass_at(self, level: int) -> np.ndarray:
        if level not in self.masses:
            raise DomainError(f"measure not defined at level {level}")
        return self.masses[level]


def build_frostman_measure(tree: CircledTree, levels: Sequence[int]) -> DyadicMeasure:
    """Proportional mass splitting along subtree sums M_{l_k}(u).

    Base level l_0 starts uniform (mass 2^-l_0 per interval); between
    schedule levels, the mass of a level-l_{k-1} vertex v splits among its
    descendants u proportionally to M_{l_k}(u).  A schedule level whose
    subtree sum vanishes under a mass-carrying parent raises
    ScheduleRejectedError (the caller retries; nothing is renormalized).
    """
    levels = list(levels)
    if len(levels) < 2 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ParameterError("need strictly increasing levels l_0 < l_1 < ... < l_K")
    base = levels[0]
    masses: Dict[int, np.ndarray] = {
        base: np.full(1 << base, 2.0 ** (-base), dtype=np.float64)
    }
    for lo, hi in zip(levels, levels[1:]):
        marks_hi = tree.marks_at(hi)
        parent_mass = masses[lo]
        # subtree sums from each level-lo parent down to level hi
        sums_lo = marks_hi.reshape(1 << lo, -1).sum(axis=1)
        bad = (parent_mass > 0.0) & (sums_lo == 0.0)
        if bad.any():
            raise ScheduleRejectedError(level=hi, parent_index=int(np.argmax(bad)))
        ratio = np.divide(
            parent_mass, sums_lo, out=np.zeros_like(parent_mass), where=sums_lo > 0.0
        )
        for m in range(lo + 1, hi + 1):
            sums_m = marks_hi.reshape(1 << m, -1).sum(axis=1)
            masses[m] = sums_m * np.repeat(ratio, 1 << (m - lo))
    return DyadicMeasure(base_level=base, masses=masses)


def gamma_energy(measure: DyadicMeasure, gamma: float, depth: int) -> float:
    """Discrete double-sum gamma-energy at the given evaluation depth.

    Off-diagonal terms use the wrapped midpoint distance on the circle;
    each diagonal cell is refined as a uniform self-energy
    2/((1-gamma)(2-gamma)) * mass^2 * 2^(depth*gamma).  Increasing in depth;
    diverges with depth exactly for measures with atoms.
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must be in (0, 1), got {gamma}")
    mass = measure.mass_at(depth)
    support = np.flatnonzero(mass > 0.0)
    mu = mass[support]
    x = (support + 0.5) * 2.0 ** (-depth)
    total = 0.0
    chunk = max(1, (1 << 22) // max(mu.size, 1))
    for i0 in range(0, mu.size, chunk):
        dx = np.abs(x[i0 : i0 + chunk, None] - x[None, :])
        dist = np.minimum(dx, 1.0 - dx)
        rows = np.arange(dist.shape[0])
        dist[rows, i0 + rows] = np.inf  # self-pairs go to the diagonal refinement
        block = mu[i0 : i0 + chunk, None] * mu[None, :] / dist**gamma
        total += float(block.sum())
    diagonal = (
        2.0 / ((1.0 - gamma) * (2.0 - gamma))
        * float((mu * mu).sum())
        * 2.0 ** (depth * gamma)
    )
    return total + diagonal


def dump_tree(tree: CircledTree, fh: IO[str]) -> None:
    """One line per marked level: level, q, time, then the 2^level marks."""
    schedule = tree.config.schedule()
    for level in tree.levels():
        marks = " ".join(f"{z:.6g}" for z in tree.marks[level])
        fh.write(f"{level} {tree.config.q:g} {schedule.time_at(level)} {marks}\n")


def dump_measure_csv(measure: DyadicMeasure, fh: IO[str]) -> None:
    """Measure dump: CSV columns (level, index, mass)."""
    w = csv.writer(fh)
    w.writerow(["level", "index", "mass"])
    for level in sorted(measure.masses):
        for i, m in enumerate(measure.masses[level]):
            w.writerow([level, i, repr(float(m))])
