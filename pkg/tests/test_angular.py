import math

import numpy as np
import pytest

import rotwalk as rw
from rotwalk.errors import DomainError, ParameterError, RegimeError

GAUSS = rw.ComplexGaussian(1.0)


def test_window_spec_validation_and_flag():
    with pytest.raises(DomainError):
        rw.WindowSpec(n=100, eps=0.0, eta=0.1, beta=0.5, resolution=16)
    with pytest.raises(ParameterError):
        rw.WindowSpec(n=100, eps=0.01, eta=0.1, beta=0.5, resolution=4)
    tight = rw.WindowSpec(n=10_000, eps=10_000**-1.5, eta=0.1, beta=0.5, resolution=16)
    assert not tight.regime_violated
    loose = rw.WindowSpec(n=10, eps=0.5, eta=0.01, beta=0.5, resolution=16)
    assert loose.regime_violated


def test_angular_huge_eta_never_exceeds():
    w = rw.WindowSpec(n=200, eps=0.001, eta=1e3, beta=0.5, resolution=8)
    est = rw.mc_angular_exceedance(GAUSS, w, 0.5, 2_000, seed=1)
    assert est.grid.p_hat == 0.0
    assert est.corrected.p_hat == 0.0


def test_angular_violated_regime_has_mass():
    w = rw.WindowSpec(n=10, eps=0.5, eta=0.01, beta=0.5, resolution=16)
    est = rw.mc_angular_exceedance(GAUSS, w, 0.5, 2_000, seed=2)
    assert est.regime_violated
    assert est.grid.p_hat > 0.5  # tiny threshold, wide window


def test_angular_grid_monotone_in_resolution():
    # nested grids (K and 2K-1 points) detect nondecreasing exceedance sets
    base = dict(n=500, eps=0.002, eta=0.08, beta=0.5)
    coarse = rw.mc_angular_exceedance(
        GAUSS, rw.WindowSpec(resolution=9, **base), 0.3, 4_000, seed=3
    )
    fine = rw.mc_angular_exceedance(
        GAUSS, rw.WindowSpec(resolution=17, **base), 0.3, 4_000, seed=3
    )
    assert fine.grid.p_hat >= coarse.grid.p_hat
    assert coarse.corrected.p_hat >= coarse.grid.p_hat


def test_angular_rotational_reduction():
    # anchoring the window at theta' = 0 vs a generic theta' gives compatible
    # frequencies (rotational invariance of the law)
    n, eps, reps, thr = 400, 0.003, 3_000, 0.9 * rw.threshold(0.4, 400)
    hits0 = hits1 = 0
    for r in range(reps):
        u = rw.sample_increments(GAUSS, n, rw.SeedSpec(555, r))
        hits0 += rw.sup_window(u, 0.0, eps, 9) > thr
        hits1 += rw.sup_window(u, 0.37, eps, 9) > thr
    p0, p1 = hits0 / reps, hits1 / reps
    se = math.sqrt((p0 * (1 - p0) + p1 * (1 - p1)) / reps) or 1e-3
    assert abs(p0 - p1) < 4 * se


def test_taylor_bound_values():
    assert rw.taylor_tail_bound(10_000, 3, 1e-7, 1e9, 1.0) == 0.0  # eta -> inf
    # frozen direct-arithmetic snapshot: n=1e4, k=3, eps=n^-1.4, eta=.5, alpha=1
    snap = rw.taylor_tail_bound(10_000, 3, 10_000**-1.4, 0.5, 1.0)
    assert snap == pytest.approx(9.395824695315889e-29, rel=1e-10)
    assert snap < 1e-6
    with pytest.raises(RegimeError):
        rw.taylor_tail_bound(100, 3, 0.1, 0.5, 1.0)  # n^(k+1) eps^k >= 1
    with pytest.raises(DomainError):
        rw.taylor_tail_bound(100, 1, 1e-5, 0.5, 1.0)


def test_taylor_bound_monotone_in_n():
    vals = [rw.taylor_tail_bound(n, 3, n**-1.4, 0.5, 1.0) for n in (10**3, 10**4, 10**5)]
    assert vals[0] > vals[1] > vals[2]


def test_taylor_bound_dominates_mc_upper_ci(threads):
    # five regime configurations: zero observed exceedances and the analytic
    # majorant above the exact binomial upper confidence bound
    settings = [
        (0.30, 0.10), (0.40, 0.10), (0.20, 0.15), (0.50, 0.08), (0.25, 0.12),
    ]
    n, reps = 10_000, 10_000
    eps = n**-1.5
    for alpha, eta in settings:
        w = rw.WindowSpec(n=n, eps=eps, eta=eta, beta=0.5, resolution=16)
        est = rw.mc_angular_exceedance(
            GAUSS, w, alpha, reps, seed=808, threads=threads, dtype=np.float32
        )
        bound = rw.taylor_tail_bound(n, 3, eps, eta, alpha)
        assert est.grid.count == 0
        assert bound >= est.grid.upper95()


def test_time_gap_empty_gap_is_angular_only():
    # floor(q^n) == floor(q^(n+1)): the event degenerates to the angular sup
    est = rw.mc_time_gap_exceedance(
        GAUSS, q=1.01, n_level=75, eta=3.0, alpha=0.5, replicas=500, seed=4
    )
    assert est.times_sampled == 1
    assert not est.subsampled
    assert est.estimate.p_hat == 0.0


def test_time_gap_subsampling_and_regimes():
    # q near 1 (the gap-filling regime): moderate eta sees no exceedances
    est = rw.mc_time_gap_exceedance(
        GAUSS, q=1.1, n_level=68, eta=3.0, alpha=0.5, replicas=500, seed=5, sub_cap=32
    )
    assert est.subsampled  # gap of ~66 times against a cap of 32
    assert est.estimate.p_hat == 0.0
    # tiny eta: the event is near-certain
    loose = rw.mc_time_gap_exceedance(
        GAUSS, q=3.0, n_level=5, eta=0.05, alpha=0.5, replicas=500, seed=5
    )
    assert loose.estimate.p_hat > 0.5


def test_time_increment_matches_exact_gaussian_tail(threads):
    # P(|B_{n2} - B_{n1}| > t) = exp(-t^2/(2(n2-n1)))
    for n1, n2, p_target, seed in [(1000, 1500, 0.1, 6), (200, 300, 0.3, 7)]:
        v = n2 - n1
        t = math.sqrt(2 * v * math.log(1 / p_target))
        est = rw.mc_time_increment_tail(GAUSS, n1, n2, t, 100_000, seed, threads=threads)
        exact = rw.complex_normal_abs_tail(v, t)
        assert exact == pytest.approx(p_target, rel=1e-12)
        assert abs(est.p_hat - exact) < 4 * est.stderr


def test_time_increment_rejects_bad_interval():
    with pytest.raises(DomainError):
        rw.mc_time_increment_tail(GAUSS, 10, 10, 1.0, 100, seed=1)
