import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rotwalk as rw
from rotwalk.errors import DomainError, ParameterError
from rotwalk.walk import dump_grid_csv, floor_power, fold_mod


def test_eval_point_single_step_quarter_turn():
    assert rw.eval_point([1.0], 0.25) == pytest.approx(1j, abs=1e-15)


def test_eval_point_full_period_cancellation():
    assert rw.eval_point([1, 1, 1, 1], 0.25) == pytest.approx(0.0, abs=1e-14)


def test_eval_point_two_terms():
    assert rw.eval_point([1.0, 1.0j], 0.5) == pytest.approx(-1.0 + 1.0j, abs=1e-14)


def test_eval_point_normalizes_theta_mod_one():
    u = rw.sample_increments(rw.ComplexGaussian(1.0), 64, rw.SeedSpec(1))
    assert rw.eval_point(u, 1.3) == pytest.approx(rw.eval_point(u, 0.3), rel=1e-12)


def test_eval_point_linearity_and_rotation_covariance():
    gen = np.random.default_rng(0)
    u = gen.standard_normal(128) + 1j * gen.standard_normal(128)
    v = gen.standard_normal(128) + 1j * gen.standard_normal(128)
    lhs = rw.eval_point(2.0 * u + (1 - 3j) * v, 0.17)
    rhs = 2.0 * rw.eval_point(u, 0.17) + (1 - 3j) * rw.eval_point(v, 0.17)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    phase = np.exp(1j * 1.234)
    assert rw.eval_point(phase * u, 0.17) == pytest.approx(
        phase * rw.eval_point(u, 0.17), rel=1e-12
    )


def test_grid_single_step_roots_of_unity():
    g = rw.eval_grid_fft([1.0], 3)
    expect = np.exp(2j * np.pi * np.arange(8) / 8)
    assert np.allclose(g.values, expect, atol=1e-12)


def test_grid_depth_zero_is_plain_sum():
    u = rw.sample_increments(rw.UnitCircle(), 1000, rw.SeedSpec(2))
    g = rw.eval_grid_fft(u, 0)
    assert g.values.shape == (1,)
    assert g.values[0] == pytest.approx(u.sum(), rel=1e-12)


def test_grid_matches_direct_evaluation():
    u = rw.sample_increments(rw.ComplexGaussian(1.0), 100_000, rw.SeedSpec(3))
    g = rw.eval_grid_fft(u, 10)
    gen = np.random.default_rng(0)
    for i in gen.integers(0, 1 << 10, size=16):
        direct = rw.eval_point(u, i / 1024)
        assert abs(g.values[i] - direct) <= 1e-9 * (1.0 + abs(g.values[i]))


def test_grid_refinement_embedding():
    u = rw.sample_increments(rw.UnitCircle(), 5000, rw.SeedSpec(4))
    coarse = rw.eval_grid_fft(u, 6)
    fine = rw.eval_grid_fft(u, 7)
    assert np.allclose(fine.values[0::2], coarse.values, rtol=1e-11, atol=1e-9)


def test_fold_mod_places_indices_correctly():
    u = np.array([1.0, 10.0, 100.0, 1000.0])  # U_1..U_4
    c = fold_mod(u, 1)  # residues of j = 1,2,3,4 mod 2
    assert np.allclose(c, [10.0 + 1000.0, 1.0 + 100.0])


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 300), depth=st.integers(0, 6))
@settings(max_examples=40, deadline=None)
def test_grid_fft_equals_direct_property(seed, n, depth):
    u = rw.sample_increments(rw.ComplexGaussian(1.0), n, rw.SeedSpec(seed))
    g = rw.eval_grid_fft(u, depth)
    i = seed % (1 << depth)
    direct = rw.eval_point(u, i / (1 << depth))
    assert abs(g.values[i] - direct) <= 1e-9 * (1.0 + abs(g.values[i]))


def test_walk_second_moment():
    # E|S_n|^2 = 2 sigma^2 n for every theta
    n, reps = 64, 100_000
    for law, theta in [(rw.ComplexGaussian(1.0), 0.3), (rw.UnitCircle(), 0.123)]:
        gen = rw.SeedSpec(77).generator()
        x, y = law.sample_reim(gen, n * reps, np.float64)
        u = (x + 1j * y).reshape(reps, n)
        s = u @ np.exp(2j * np.pi * theta * np.arange(1, n + 1))
        m2 = np.mean(np.abs(s) ** 2)
        target = 2 * law.sigma2 * n
        se = np.std(np.abs(s) ** 2) / math.sqrt(reps)
        assert abs(m2 - target) < 4 * se


def test_threshold_values_and_errors():
    assert rw.threshold(1.0, 100) == pytest.approx(math.sqrt(200 * math.log(100)), rel=1e-14)
    assert rw.threshold(0.5, 7) == pytest.approx(math.sqrt(7 * math.log(7)), rel=1e-14)
    with pytest.raises(DomainError):
        rw.threshold(1.0, 1)
    with pytest.raises(DomainError):
        rw.threshold(0.0, 100)
    spec = rw.ThresholdSpec(alpha=0.5)
    assert spec.radius(100) == pytest.approx(math.sqrt(0.5 * math.log(100)), rel=1e-14)
    assert spec.phi(100) / math.sqrt(200.0) == pytest.approx(spec.radius(100), rel=1e-12)


def test_eval_derivative():
    assert rw.eval_derivative([1.0, 1.0], 1, 0.0) == pytest.approx(6j * np.pi, rel=1e-13)
    assert abs(rw.eval_derivative([1.0, 1.0], 1, 0.0)) == pytest.approx(
        18.84955592153876, rel=1e-12
    )
    assert rw.eval_derivative([1.0], 2, 0.0) == pytest.approx(
        -4 * np.pi**2, rel=1e-13
    )
    # real increments at theta=0, j=1: purely imaginary
    val = rw.eval_derivative(np.array([0.3, 1.7, -2.2]), 1, 0.0)
    assert val.real == pytest.approx(0.0, abs=1e-12)
    assert rw.eval_derivative([1.0, 2.0], 0, 0.25) == rw.eval_point([1.0, 2.0], 0.25)
    with pytest.raises(DomainError):
        rw.eval_derivative([1.0], 9, 0.0)


def test_sup_window():
    with pytest.raises(DomainError):
        rw.sup_window(np.ones(4, complex), 0.0, 0.0, 8)
    with pytest.raises(DomainError):
        rw.sup_window(np.ones(4, complex), 0.0, 0.1, 1)
    # single step: sup over [0, 1/2] of |e^{2 pi i theta} - 1| = 2 at theta = 1/2
    assert rw.sup_window(np.array([1.0 + 0j]), 0.0, 0.5, 4097) == pytest.approx(2.0)
    # monotone nondecreasing on nested grids
    u = rw.sample_increments(rw.ComplexGaussian(1.0), 500, rw.SeedSpec(9))
    coarse = rw.sup_window(u, 0.0, 0.01, 9)
    fine = rw.sup_window(u, 0.0, 0.01, 17)
    assert fine >= coarse
    grid, corrected = rw.sup_window(u, 0.0, 0.01, 17, with_correction=True)
    assert corrected >= grid == fine


def test_time_schedule():
    ts = rw.TimeSchedule(q=1.1, max_level=50)
    assert ts.times[0] == 1
    assert all(b > a for a, b in zip(ts.times, ts.times[1:]))
    assert ts.time_at(50) == 117
    assert ts.time_at(0) == 1
    # duplicate small levels collapse but the level map stays total
    assert len(ts.level_of) == 51
    with pytest.raises(ParameterError):
        rw.TimeSchedule(q=1.0, max_level=3)


def test_floor_power_exactness():
    # 1.1 in binary is slightly below 1.1 decimal; naive powers drift
    for k in (10, 30, 50, 73):
        from fractions import Fraction

        assert floor_power(1.1, k) == int(Fraction(1.1) ** k)
    assert floor_power(3.0, 12) == 531441
    assert floor_power(2.0, 20) == 1 << 20


def test_grid_csv_dump():
    g = rw.eval_grid_fft([1.0, 1.0j], 2)
    buf = io.StringIO()
    dump_grid_csv(g, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "i,theta,re,im,modulus"
    assert len(lines) == 5
    first = lines[1].split(",")
    assert int(first[0]) == 0
    assert float(first[4]) == pytest.approx(abs(g.values[0]))
