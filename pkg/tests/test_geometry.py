import numpy as np
import pytest

from conekit.adversarial import sample_descent_cone
from conekit.errors import ArgumentError
from conekit.frames import spectral_tetris
from conekit.geometry import (
    alignment,
    in_descent_cone_closure,
    in_E_mu_delta,
    in_subdifferential,
    max_descent_step_bound,
    project_T,
    project_Tperp,
    tangent_space,
)
from conekit.measurement import random_unit_vector
from conekit.numerics import (
    complex_gaussian,
    frobenius_norm,
    nuclear_norm,
    re_inner,
)


def _rank_one(seed, K=6, N=5, scale=1.0):
    rng = np.random.default_rng(seed)
    u = random_unit_vector(rng, K)
    v = random_unit_vector(rng, N)
    return scale * np.outer(u, v.conj()), u, v


def _orthogonal_direction(X, rng):
    """u' v'* with u' orthogonal to the column space, v' to the row space."""
    ts = tangent_space(X)
    K, N = X.shape
    u = complex_gaussian(rng, K)
    u -= ts.factors.U @ (ts.factors.U.conj().T @ u)
    v = complex_gaussian(rng, N)
    v -= ts.factors.V @ (ts.factors.V.conj().T @ v)
    return np.outer(u / np.linalg.norm(u), v.conj() / np.linalg.norm(v))


@pytest.mark.parametrize("seed", range(20))
def test_projection_decomposition(seed):
    X, _, _ = _rank_one(seed)
    ts = tangent_space(X)
    rng = np.random.default_rng(seed + 100)
    M = complex_gaussian(rng, X.shape)
    PT = project_T(ts, M)
    PTp = project_Tperp(ts, M)
    assert np.allclose(project_T(ts, PT), PT, atol=1e-10)
    assert np.allclose(PT + PTp, M, atol=1e-12)
    assert abs(frobenius_norm(PT) ** 2 + frobenius_norm(PTp) ** 2
               - frobenius_norm(M) ** 2) <= 1e-10


def test_tangent_members_project_to_zero_normal():
    X, u, v = _rank_one(0)
    rng = np.random.default_rng(5)
    A = complex_gaussian(rng, (5, 1))
    B = complex_gaussian(rng, (6, 1))
    M = np.outer(u, A.conj()) + np.outer(B, v.conj())
    ts = tangent_space(X)
    assert frobenius_norm(project_Tperp(ts, M)) <= 1e-12


def test_orthogonal_direction_projects_to_zero_tangent():
    X, _, _ = _rank_one(1)
    M = _orthogonal_direction(X, np.random.default_rng(6))
    ts = tangent_space(X)
    assert frobenius_norm(project_T(ts, M)) <= 1e-12


def test_tangent_space_rejects_zero():
    with pytest.raises(ArgumentError):
        tangent_space(np.zeros((3, 3)))


def test_subdifferential_examples():
    X, _, _ = _rank_one(2)
    ts = tangent_space(X)
    res = in_subdifferential(X, ts.uv_star)
    assert res.member and res.tangent_residual <= 1e-12

    bad = ts.uv_star + 2.0 * _orthogonal_direction(X, np.random.default_rng(7))
    res2 = in_subdifferential(X, bad)
    assert not res2.member
    assert res2.normal_spectral == pytest.approx(2.0, rel=1e-10)

    res3 = in_subdifferential(X, np.zeros_like(X))
    assert not res3.member


def test_descent_cone_examples():
    X, _, _ = _rank_one(3, scale=1.7)
    res = in_descent_cone_closure(X, -X)
    assert res.member
    assert res.margin == pytest.approx(frobenius_norm(X), rel=1e-10)

    D = _orthogonal_direction(X, np.random.default_rng(8))
    res2 = in_descent_cone_closure(X, D)
    assert not res2.member
    assert res2.margin == pytest.approx(-nuclear_norm(D), rel=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_closure_members_nearly_descend(seed):
    # strict-margin members admit a step on a logarithmic grid that does not
    # increase the nuclear norm beyond the documented slack
    X, _, _ = _rank_one(seed, scale=1.3)
    fm = spectral_tetris(12, 6)
    for s in sample_descent_cone(fm, X, 5, seed + 200):
        if s.margin <= 1e-6:
            continue
        base = nuclear_norm(X)
        scale = frobenius_norm(X) / frobenius_norm(s.Z)
        assert any(
            nuclear_norm(X + (10.0 ** -k) * scale * s.Z) <= base + 1e-9
            for k in range(1, 9)
        )


@pytest.mark.parametrize("seed", range(10))
def test_subdifferential_cone_duality(seed):
    X, _, _ = _rank_one(seed)
    ts = tangent_space(X)
    rng = np.random.default_rng(seed + 300)
    G = project_Tperp(ts, complex_gaussian(rng, X.shape))
    W = ts.uv_star + 0.9 * G / max(np.linalg.svd(G, compute_uv=False)[0], 1e-300)
    assert in_subdifferential(X, W).member
    for s in sample_descent_cone(None, X, 5, seed + 400):
        assert re_inner(W, s.Z) <= 1e-8


def test_max_descent_examples():
    X, _, _ = _rank_one(4, scale=2.0)
    assert max_descent_step_bound(X, -X) == pytest.approx(2 * frobenius_norm(X), rel=1e-12)
    # a direction orthogonal to X in the real inner product
    D = _orthogonal_direction(X, np.random.default_rng(9))
    assert max_descent_step_bound(X, D) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ArgumentError):
        max_descent_step_bound(X, np.zeros_like(X))


@pytest.mark.parametrize("seed", range(30))
def test_max_descent_contrapositive_scan(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = _rank_one(seed, scale=float(rng.uniform(0.5, 2.0)))
    Z = complex_gaussian(rng, X.shape)
    Z /= frobenius_norm(Z)
    bound = max_descent_step_bound(X, Z)
    base = nuclear_norm(X)
    for t in np.linspace(0.01, 3.0, 80):
        if nuclear_norm(X + t * Z) <= base + 1e-12:
            assert t <= bound + 1e-9


def test_e_mu_delta_membership():
    fm = spectral_tetris(16, 8)
    rng = np.random.default_rng(11)
    h0 = random_unit_vector(rng, 8)
    m0 = random_unit_vector(rng, 8)
    X0 = np.outer(h0, m0.conj())
    mu = max(1.0, float(np.sqrt(16) * np.max(np.abs(fm.B.conj() @ h0)))) + 0.1

    z_neg = -X0 / frobenius_norm(X0)
    res = in_E_mu_delta(fm, X0, z_neg, mu, delta=1.0)
    assert res.member
    assert res.alignment == pytest.approx(1.0, rel=1e-10)

    z_tan = _orthogonal_direction(X0, rng)  # alignment 0, not in the closure
    res2 = in_E_mu_delta(fm, X0, z_tan, mu, delta=0.5)
    assert not res2.member

    for s in sample_descent_cone(fm, X0, 20, 12):
        for delta in (0.1, 0.5, 0.9):
            res3 = in_E_mu_delta(fm, X0, s.Z, mu, delta)
            assert res3.member == (s.alignment >= delta - 1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_b1_lower_bound_on_sampled_members(seed):
    from conekit.frames import b1_norm, incoherence_mu

    fm = spectral_tetris(16, 8)
    rng = np.random.default_rng(seed)
    h0 = random_unit_vector(rng, 8)
    m0 = random_unit_vector(rng, 8)
    X0 = np.outer(h0, m0.conj())
    mu = incoherence_mu(fm, h0)
    for s in sample_descent_cone(fm, X0, 40, seed + 500):
        assert b1_norm(fm, s.Z) >= s.alignment * np.sqrt(16) / mu - 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_large_entries_count(seed):
    import math

    from conekit.frames import row_profile

    fm = spectral_tetris(24, 12)
    rng = np.random.default_rng(seed)
    Z = complex_gaussian(rng, (12, 9))
    Z /= frobenius_norm(Z)
    prof = row_profile(fm, Z)
    bnorm = prof.sum()
    log_el = math.log(math.e * 24)
    count = int(np.count_nonzero(prof >= bnorm / (24 * log_el)))
    assert count >= bnorm ** 2 / log_el ** 2 - 1e-9


def test_alignment_sign():
    X, _, _ = _rank_one(5)
    assert alignment(X, -X) == pytest.approx(frobenius_norm(X), rel=1e-12)
    assert alignment(X, X) == pytest.approx(-frobenius_norm(X), rel=1e-12)
