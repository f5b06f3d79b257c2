import math

import numpy as np
import pytest

from conekit.errors import ArgumentError
from conekit.frames import spectral_tetris
from conekit.measurement import deconv_forward, deconv_instance, random_unit_vector
from conekit.numerics import complex_gaussian
from conekit.smallball import (
    gaussian_width_sample,
    paley_zygmund_check,
    projection_concentration_check,
    small_ball_count,
)


def _instance(seed):
    fm = spectral_tetris(16, 8)
    rng = np.random.default_rng(seed + 100)
    return deconv_instance(fm, 8, random_unit_vector(rng, 8),
                           random_unit_vector(rng, 8), seed)


def test_small_ball_count_zero_matrix():
    inst = _instance(0)
    assert small_ball_count(inst, np.zeros((8, 8), dtype=complex), 0.5) == 0


def test_small_ball_count_tiny_threshold_counts_nonzeros():
    inst = _instance(1)
    rng = np.random.default_rng(3)
    Z = complex_gaussian(rng, (8, 8))
    vals = np.abs(deconv_forward(inst, Z))
    assert small_ball_count(inst, Z, 1e-300) == int(np.count_nonzero(vals))


def test_small_ball_count_markov_sanity():
    inst = _instance(2)
    rng = np.random.default_rng(4)
    Z = complex_gaussian(rng, (8, 8))
    vals = np.abs(deconv_forward(inst, Z))
    xi = float(np.median(vals))
    assert small_ball_count(inst, Z, xi) * xi <= vals.sum() + 1e-12


def test_paley_zygmund_boundary_case():
    rng = np.random.default_rng(5)
    X = complex_gaussian(rng, (6, 8))
    b = random_unit_vector(rng, 6)
    xi = float(np.linalg.norm(X.conj().T @ b)) / 4.0
    rep = paley_zygmund_check(b, X, xi, trials=20_000, seed=7)
    assert rep.passed
    assert rep.estimate >= 9.0 / 32.0 - 3.0 * rep.stderr
    assert rep.details["second_moment_ok"]
    assert rep.details["fourth_moment_ok"]


def test_paley_zygmund_large_margin_probability_near_one():
    rng = np.random.default_rng(6)
    X = complex_gaussian(rng, (4, 4))
    b = random_unit_vector(rng, 4)
    xi = float(np.linalg.norm(X.conj().T @ b)) / 100.0
    rep = paley_zygmund_check(b, X, xi, trials=5_000, seed=8)
    assert rep.estimate >= 0.99


def test_paley_zygmund_preconditions():
    rng = np.random.default_rng(9)
    b = random_unit_vector(rng, 4)
    # X* b = 0: columns of X orthogonal to b
    u = complex_gaussian(rng, 4)
    u -= b * np.vdot(b, u)
    X = np.outer(u, complex_gaussian(rng, 3).conj())
    with pytest.raises(ArgumentError):
        paley_zygmund_check(b, X, 0.1, trials=2_000, seed=1)
    with pytest.raises(ArgumentError):
        paley_zygmund_check(b, complex_gaussian(rng, (4, 3)), 1e-6, trials=10, seed=1)


def test_projection_full_dimension_is_identity():
    rep = projection_concentration_check(5, 5, trials=1_000, eps=0.1, seed=0)
    assert rep.estimate == pytest.approx(1.0, abs=1e-12)
    assert rep.details["band_failure_rate"] == 0.0


def test_projection_k1_n2_mean():
    rep = projection_concentration_check(2, 1, trials=20_000, eps=0.5, seed=1)
    assert rep.passed
    assert abs(rep.estimate - 1.0) <= 3.0 * rep.stderr


def test_projection_100_10():
    rep = projection_concentration_check(100, 10, trials=2_000, eps=0.5, seed=2)
    assert rep.passed
    assert 0.0 <= rep.details["band_failure_rate"] <= 1.0


def test_width_singleton_zero():
    rep = gaussian_width_sample([np.zeros((3, 3))], trials=1_000, seed=0)
    assert rep.estimate == 0.0


def test_width_sign_pair_half_normal():
    E = np.zeros((4, 4))
    E[0, 0] = 1.0
    rep = gaussian_width_sample([E, -E], trials=50_000, seed=3)
    target = 1.0 / math.sqrt(math.pi)  # E|Re g| for CN(0,1) entries
    assert abs(rep.estimate - target) <= 3.0 * rep.stderr


def test_width_empty_set_rejected():
    with pytest.raises(ArgumentError):
        gaussian_width_sample([], trials=1_000, seed=0)


def test_width_reference_upper():
    E = np.zeros((2, 2))
    E[0, 0] = 1.0
    rep = gaussian_width_sample([E, -E], trials=2_000, seed=4, reference_upper=2.0)
    assert rep.passed


def test_reports_are_deterministic():
    rng = np.random.default_rng(10)
    X = complex_gaussian(rng, (5, 5))
    b = random_unit_vector(rng, 5)
    xi = float(np.linalg.norm(X.conj().T @ b)) / 4.0
    a = paley_zygmund_check(b, X, xi, trials=2_000, seed=11)
    c = paley_zygmund_check(b, X, xi, trials=2_000, seed=11)
    assert a == c
    p1 = projection_concentration_check(20, 4, trials=1_000, eps=0.3, seed=12)
    p2 = projection_concentration_check(20, 4, trials=1_000, eps=0.3, seed=12)
    assert p1 == p2
