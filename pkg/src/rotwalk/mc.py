"""Replica-parallel Monte Carlo engine.

Replica r of a run seeded with master seed s consumes exactly the stream
keyed by (s, r) -- the same stream ``sample_increments`` would produce -- so
results are a pure function of the configuration and independent of worker
count or scheduling.  Replicas are partitioned into fixed blocks (the
partition depends only on the job, never on the thread count), each block
reduces locally, and block results are combined in block order with
``math.fsum`` so floating-point reduction is deterministic.

Kernels accept a sampling dtype: float64 is the reference; float32 halves
the RNG and transcendental cost for large jobs (statistics are always
accumulated in float64, and the remaining per-step quantization is orders
of magnitude below Monte Carlo resolution at feasible replica counts).
"""

from __future__ import annotations

import math
from functools import partial
from multiprocessing import get_context
from typing import Callable, List, Sequence

import numpy as np

from .walk import floor_power

_BLOCK_TARGET = 1 << 24  # increments per block
_BATCH_TARGET = 1 << 22  # increments per in-block matrix batch


def _limit_worker_blas():
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(1)
    except Exception:
        pass


def block_bounds(replicas: int, block_size: int) -> List[tuple]:
    return [(r0, min(r0 + block_size, replicas)) for r0 in range(0, replicas, block_size)]


def auto_block_size(replicas: int, n: int, min_blocks: int = 1) -> int:
    size = max(1, min(_BLOCK_TARGET // max(n, 1), 1 << 16))
    if min_blocks > 1:
        size = min(size, max(1, -(-replicas // min_blocks)))
    return size


def run_blocks(
    block_fn: Callable,
    replicas: int,
    block_size: int,
    threads: int = 1,
) -> list:
    """Apply ``block_fn(r0, r1)`` over the fixed block partition, in order."""
    bounds = block_bounds(replicas, block_size)
    if threads <= 1 or len(bounds) == 1:
        return [block_fn(r0, r1) for r0, r1 in bounds]
    ctx = get_context("fork")
    with ctx.Pool(processes=threads, initializer=_limit_worker_blas) as pool:
        return pool.starmap(block_fn, bounds, chunksize=1)


def fsum_blocks(block_values: Sequence[float]) -> float:
    return math.fsum(block_values)


# ---------------------------------------------------------------------------
# batch sampling
# ---------------------------------------------------------------------------

def replica_generators(master_seed, r0, r1):
    """Yield one Generator per replica in [r0, r1), each positioned at the
    start of the stream keyed by (master_seed, replica).

    Streams are identical to ``SeedSpec(master_seed, r).generator()`` but a
    single Philox object is re-keyed from a pristine state template, which
    is several times cheaper than per-replica construction.
    """
    bitgen = np.random.Philox(key=[master_seed & 0xFFFFFFFFFFFFFFFF, r0 & 0xFFFFFFFFFFFFFFFF])
    gen = np.random.Generator(bitgen)
    template = bitgen.state  # pristine: zero counter, empty buffer
    for r in range(r0, r1):
        template["state"]["key"][1] = r
        bitgen.state = template
        yield gen


def sample_sums(law, n, master_seed, r0, r1, dtype):
    """Row sums S_n(0) for replicas [r0, r1), as float64 (re, im) arrays."""
    count = r1 - r0
    re = np.empty(count)
    im = np.empty(count)
    for i, gen in enumerate(replica_generators(master_seed, r0, r1)):
        x, y = law.sample_reim(gen, n, dtype)
        re[i] = x.sum(dtype=np.float64)
        im[i] = y.sum(dtype=np.float64)
    return re, im


def sample_matrix(law, n, master_seed, r0, r1, dtype):
    """(r1-r0, n) complex matrix of increments, complex64 when dtype=float32."""
    count = r1 - r0
    cdtype = np.complex64 if dtype == np.float32 else np.complex128
    z = np.empty((count, n), dtype=cdtype)
    for i, gen in enumerate(replica_generators(master_seed, r0, r1)):
        x, y = law.sample_reim(gen, n, dtype)
        z.real[i] = x
        z.imag[i] = y
    return z


def _batches(r0, r1, n):
    step = max(1, _BATCH_TARGET // max(n, 1))
    return [(b0, min(b0 + step, r1)) for b0 in range(r0, r1, step)]


def phase_matrix(n: int, thetas: Sequence[float], dtype) -> np.ndarray:
    """(n, K) matrix exp(2i*pi*j*theta_k), complex64 when dtype=float32."""
    j = np.arange(1, n + 1)[:, None]
    ph = np.exp(2j * np.pi * j * np.asarray(thetas)[None, :])
    return ph.astype(np.complex64 if dtype == np.float32 else np.complex128)


# ---------------------------------------------------------------------------
# block kernels (top-level functions so they pickle into worker processes)
# ---------------------------------------------------------------------------

def tail_block(law, n, thr, master_seed, dtype, r0, r1):
    re, im = sample_sums(law, n, master_seed, r0, r1, dtype)
    return int(np.count_nonzero(re * re + im * im > thr * thr))


def smoothed_block(law, n, spec, scale, master_seed, dtype, r0, r1):
    from .plateau import plateau_eval

    re, im = sample_sums(law, n, master_seed, r0, r1, dtype)
    vals = plateau_eval(spec, np.sqrt(re * re + im * im) / scale)
    return math.fsum(vals), math.fsum(vals * vals)


def joint_block(law, n, thetas, thr, master_seed, dtype, r0, r1):
    """Counts (single exceedances per angle, joint-with-angle-0 per angle).

    Angle 0 is prepended internally; returned ``singles`` has length
    len(thetas) + 1 with the base walk first, ``joints`` has len(thetas).
    """
    ph = phase_matrix(n, (0.0,) + tuple(thetas), dtype)
    singles = np.zeros(len(thetas) + 1, dtype=np.int64)
    joints = np.zeros(len(thetas), dtype=np.int64)
    for b0, b1 in _batches(r0, r1, n):
        z = sample_matrix(law, n, master_seed, b0, b1, dtype)
        vals = z @ ph
        exceed = np.abs(vals) > thr
        singles += exceed.sum(axis=0)
        joints += (exceed[:, :1] & exceed[:, 1:]).sum(axis=0)
    return singles, joints


def angular_block(law, n, eps, resolution, thr, correction, master_seed, dtype, r0, r1):
    """Counts of grid-sup exceedances and (optionally) corrected-sup exceedances."""
    thetas = np.linspace(0.0, eps, resolution)
    ph = phase_matrix(n, thetas, dtype)
    dph = None
    if correction:
        j = (2j * np.pi * np.arange(1, n + 1))[:, None]
        dph = ph * j.astype(ph.dtype)
    n_grid = 0
    n_corr = 0
    for b0, b1 in _batches(r0, r1, n):
        z = sample_matrix(law, n, master_seed, b0, b1, dtype)
        vals = z @ ph
        sup = np.abs(vals - vals[:, :1]).max(axis=1)
        n_grid += int(np.count_nonzero(sup > thr))
        if correction:
            slack = np.abs(z @ dph).max(axis=1) * (eps / (resolution - 1))
            n_corr += int(np.count_nonzero(sup + slack > thr))
    return n_grid, n_corr


def time_increment_block(law, n1, n2, theta, thr, master_seed, dtype, r0, r1):
    """Count of |S_{n2}(theta) - S_{n1}(theta)| > thr."""
    ph = phase_matrix(n2, (theta,), dtype)[n1:, 0]
    count = 0
    for b0, b1 in _batches(r0, r1, n2):
        z = sample_matrix(law, n2, master_seed, b0, b1, dtype)
        diff = z[:, n1:] @ ph
        count += int(np.count_nonzero(np.abs(diff) > thr))
    return count


def time_gap_block(
    law, q, n_level, resolution, thr, sub_cap, master_seed, dtype, r0, r1
):
    """Count of combined sup exceedances over angles in A_0^n and gap times."""
    t_lo = floor_power(q, n_level)
    t_hi = floor_power(q, n_level + 1)
    step = max(1, -(-(t_hi - t_lo) // sub_cap))
    times = list(range(t_lo + step, t_hi + 1, step))
    if times and times[-1] != t_hi:
        times.append(t_hi)
    if not times:
        times = [t_lo]  # degenerate gap: angular sup at the anchor time only
    width = 2.0 ** (-n_level)
    xs = np.arange(resolution) * (width / resolution)
    ph = phase_matrix(times[-1], xs, dtype)
    count = 0
    for b0, b1 in _batches(r0, r1, times[-1]):
        z = sample_matrix(law, times[-1], master_seed, b0, b1, dtype)
        anchor = z[:, :t_lo].sum(axis=1, dtype=np.complex128)
        acc = z[:, :t_lo] @ ph[:t_lo]
        best = np.zeros(b1 - b0)
        prev = t_lo
        for t in times:
            if t > prev:
                acc = acc + z[:, prev:t] @ ph[prev:t]
                prev = t
            best = np.maximum(best, np.abs(acc - anchor[:, None]).max(axis=1))
        count += int(np.count_nonzero(best > thr))
    return count, len(times), step > 1


def count_estimate(count: int, replicas: int):
    """(p_hat, stderr, ci95) for an indicator frequency."""
    p = count / replicas
    se = math.sqrt(p * (1.0 - p) / replicas)
    return p, se, (p - 1.96 * se, p + 1.96 * se)


def bind(fn, *args):
    """Partial application that stays picklable for worker processes."""
    return partial(fn, *args)
