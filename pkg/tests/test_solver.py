import numpy as np
import pytest

import helpers
from conekit.errors import ArgumentError, ConfigError
from conekit.frames import haar_frame
from conekit.measurement import (
    completion_instance,
    deconv_adjoint,
    deconv_forward,
    deconv_instance,
    haar_lowrank,
    materialize,
    mc_adjoint,
    mc_forward,
    random_unit_vector,
)
from conekit.numerics import nuclear_norm
from conekit.solver import SolverConfig, project_ball, solve, svt, write_trace_csv


def _noisy_deconv(seed, K=3, N=4, L=30, tau=0.05):
    fm = haar_frame(L, K, seed + 300)
    rng = np.random.default_rng(seed + 400)
    h0 = random_unit_vector(rng, K)
    m0 = random_unit_vector(rng, N)
    e = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    e *= tau / np.linalg.norm(e)
    inst = deconv_instance(fm, N, h0, m0, seed, e=e, tau=tau)
    forward = lambda X: deconv_forward(inst, X)
    adjoint = lambda v: deconv_adjoint(inst, v)
    return inst, forward, adjoint


def test_svt_examples():
    X = np.diag([3.0, 1.0])
    assert np.array_equal(svt(X, 0.0), X)
    assert np.allclose(svt(X, 5.0), np.zeros((2, 2)), atol=1e-15)
    assert np.allclose(svt(X, 2.0), np.diag([1.0, 0.0]), atol=1e-14)
    with pytest.raises(ArgumentError):
        svt(X, -1.0)


@pytest.mark.parametrize("seed", range(5))
def test_svt_is_proximal_map(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((4, 5))
    t = 0.7
    Y = svt(X, t)
    base = 0.5 * np.linalg.norm(Y - X) ** 2 + t * nuclear_norm(Y)
    for _ in range(50):
        D = rng.standard_normal((4, 5))
        D /= np.linalg.norm(D)
        cand = Y + 1e-4 * D
        val = 0.5 * np.linalg.norm(cand - X) ** 2 + t * nuclear_norm(cand)
        assert val >= base - 1e-12


def test_project_ball_examples():
    y = np.array([1.0, 2.0])
    assert np.array_equal(project_ball(y, y, 0.5), y)
    v = np.array([5.0, 2.0])
    assert np.array_equal(project_ball(v, y, 0.0), y)
    out = project_ball(v, y, 2.0)  # ||v - y|| = 4 = 2 tau
    assert np.allclose(out, y + 0.5 * (v - y), atol=1e-15)


def test_zero_is_returned_exactly_when_feasible():
    inst, forward, adjoint = _noisy_deconv(0)
    y = inst.y()
    res = solve(forward, adjoint, y, float(np.linalg.norm(y)) + 0.1, (3, 4))
    assert not np.any(res.X_hat)
    assert res.objective == 0.0
    assert res.converged


def test_identity_operator_equality_constraint():
    n1, n2 = 4, 3
    rng = np.random.default_rng(1)
    X0 = rng.standard_normal((n1, n2))
    forward = lambda X: np.asarray(X).ravel().astype(float)
    adjoint = lambda v: np.asarray(v).reshape(n1, n2).astype(float)
    y = forward(X0)
    res = solve(forward, adjoint, y, 0.0, (n1, n2))
    assert np.linalg.norm(res.X_hat - X0) <= 1e-7
    assert res.objective == pytest.approx(nuclear_norm(X0), rel=1e-7)


def test_objective_matches_subgradient_oracle_deconv():
    inst, forward, adjoint = _noisy_deconv(11)
    y = inst.y()
    res = solve(forward, adjoint, y, inst.tau, (3, 4))
    M = materialize(forward, (3, 4), dtype=np.complex128)
    obj, _ = helpers.projected_subgradient_nuclear(M, y, inst.tau, (3, 4),
                                                   iters=120_000, starts=5, seed=0)
    assert abs(obj - res.objective) <= 1e-3 * max(obj, 1e-12)


def test_objective_matches_subgradient_oracle_completion():
    X0 = haar_lowrank(6, 6, 2, 21)
    e = np.zeros(20)
    e[0] = 0.1
    inst = completion_instance(X0, 20, 22, e=e, tau=0.1)
    forward = lambda X: mc_forward(inst, X)
    adjoint = lambda v: mc_adjoint(inst, v)
    y = inst.y()
    res = solve(forward, adjoint, y, inst.tau, (6, 6))
    M = materialize(forward, (6, 6))
    obj, _ = helpers.projected_subgradient_nuclear(M, y, inst.tau, (6, 6),
                                                   iters=120_000, starts=5, seed=1)
    assert abs(obj - res.objective) <= 1e-3 * max(obj, 1e-12)


def test_no_feasible_probe_beats_solution():
    inst, forward, adjoint = _noisy_deconv(7)
    y = inst.y()
    cfg = SolverConfig()
    res = solve(forward, adjoint, y, inst.tau, (3, 4), cfg)
    M = materialize(forward, (3, 4), dtype=np.complex128)
    probes = helpers.feasible_probe_set(M, y, inst.tau, (3, 4), 200, seed=2)
    floor = res.objective - cfg.stop_tol_rel * res.objective
    assert all(nuclear_norm(P) >= floor for P in probes)


def test_averaged_feasibility_monotone_after_burn_in():
    X0 = haar_lowrank(20, 10, 2, 31)
    rng = np.random.default_rng(32)
    m = 60
    e = rng.standard_normal(m)
    e *= 0.05 / np.linalg.norm(e)
    inst = completion_instance(X0, m, 33, e=e, tau=0.05)
    forward = lambda X: mc_forward(inst, X)
    adjoint = lambda v: mc_adjoint(inst, v)
    cfg = SolverConfig(log_every=10, stop_tol_rel=1e-12, max_iters=3000)
    res = solve(forward, adjoint, inst.y(), inst.tau, (20, 10), cfg)
    window = [p.avg_feasibility_residual for p in res.trace if p.iteration >= 50]
    assert len(window) >= 10
    slack = 1e-9 * max(1.0, float(np.linalg.norm(inst.y())))
    assert all(window[i + 1] <= window[i] + slack for i in range(len(window) - 1))


@pytest.mark.parametrize("seed", range(3))
def test_noiseless_haar_recovery(seed):
    K = N = 8
    L = 400
    fm = haar_frame(L, K, seed + 100)
    rng = np.random.default_rng(seed + 200)
    inst = deconv_instance(fm, N, random_unit_vector(rng, K),
                           random_unit_vector(rng, N), seed)
    forward = lambda X: deconv_forward(inst, X)
    adjoint = lambda v: deconv_adjoint(inst, v)
    res = solve(forward, adjoint, inst.y(), 0.0, (K, N), SolverConfig(max_iters=5000))
    err = np.linalg.norm(res.X_hat - inst.x0())
    assert err <= 1e-2


def test_error_bound_from_dense_sigma_min():
    # sigma_min of the dense operator lower-bounds the minimum conic singular
    # value over any cone, so 2 tau / sigma_min is a certified error cap
    inst, forward, adjoint = _noisy_deconv(13, K=4, N=5, L=60, tau=0.1)
    y = inst.y()
    res = solve(forward, adjoint, y, inst.tau, (4, 5))
    M = materialize(forward, (4, 5), dtype=np.complex128)
    sigma_min = np.linalg.svd(M, compute_uv=False)[-1]
    assert np.linalg.norm(res.X_hat - inst.x0()) <= 2 * inst.tau / sigma_min + 1e-8


def test_config_validation():
    inst, forward, adjoint = _noisy_deconv(17)
    with pytest.raises(ConfigError):
        solve(forward, adjoint, inst.y(), inst.tau, (3, 4),
              SolverConfig(primal_step=10.0, dual_step=10.0))
    with pytest.raises(ConfigError):
        SolverConfig(max_iters=0).validate(1.0)
    with pytest.raises(ConfigError):
        SolverConfig(primal_step=0.1, dual_step=None).validate(1.0)


def test_max_iters_reached_reports_not_converged():
    inst, forward, adjoint = _noisy_deconv(19)
    res = solve(forward, adjoint, inst.y(), inst.tau, (3, 4),
                SolverConfig(max_iters=3, stop_tol_rel=1e-14))
    assert not res.converged
    assert res.iterations == 3


def test_trace_csv(tmp_path):
    inst, forward, adjoint = _noisy_deconv(23)
    res = solve(forward, adjoint, inst.y(), inst.tau, (3, 4),
                SolverConfig(log_every=5, max_iters=200, stop_tol_rel=1e-14))
    path = tmp_path / "trace.csv"
    write_trace_csv(res, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "iter,objective,feasibility_residual,rel_change,avg_feasibility_residual"
    assert len(lines) > 5
