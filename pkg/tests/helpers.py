"""Shared test utilities: dense-operator oracles kept independent of the solver.

The oracle solves the same constrained nuclear-norm program by projected
subgradient descent with an exact Euclidean projection onto the preimage
ball ``{x : ||M x - y|| <= tau}``.  The projection solves the secular
equation in the Lagrange multiplier through the SVD of the dense operator
(safeguarded Newton; the residual is convex and decreasing in the
multiplier).  Nothing here touches the package's splitting solver, so
objective agreement between the two is a genuine cross-check.
"""

import numpy as np


class DenseBallProjector:
    """Exact projection onto ``{x : ||M x - y|| <= tau}`` for dense M.

    Batched: ``project(Z)`` accepts ``(batch, dim)`` and projects each row.
    """

    def __init__(self, M, y, tau):
        self.M = np.asarray(M)
        self.y = np.asarray(y)
        self.tau = float(tau)
        U, s, Vh = np.linalg.svd(self.M, full_matrices=False)
        self.s = s
        self.Vh = Vh
        self.V = Vh.conj().T
        self.b = U.conj().T @ self.y
        # component of y outside the range of M; an irreducible residual
        self.off_range_sq = max(
            float(np.linalg.norm(self.y) ** 2 - np.linalg.norm(self.b) ** 2), 0.0
        )
        self.target_sq = max(self.tau ** 2 - self.off_range_sq, 0.0)

    def residual(self, x):
        return float(np.linalg.norm(self.M @ np.asarray(x) - self.y))

    def project(self, Z):
        Z = np.atleast_2d(np.asarray(Z))
        A = Z @ self.Vh.T                   # row-space coordinates a = Vh z, batch x r
        num_sq = np.abs(A * self.s - self.b) ** 2
        resid_sq = num_sq.sum(axis=1) + self.off_range_sq
        if np.all(resid_sq <= self.tau ** 2 * (1 + 1e-14)):
            return Z
        s2 = self.s ** 2
        # Newton on phi(eta) = sum num_sq/(1+eta s^2)^2 - target from eta=0;
        # phi is convex and decreasing, so the iterates increase monotonically
        # to the root.  Rows already inside keep eta=0 (their phi <= 0).
        eta = np.zeros(Z.shape[0])
        for block in range(8):
            for _ in range(8):
                denom = 1.0 + eta[:, None] * s2
                t2 = num_sq / (denom * denom)
                phi = t2.sum(axis=1) - self.target_sq
                dphi = -2.0 * (t2 * s2 / denom).sum(axis=1)
                eta += np.where(phi > 0, phi / np.maximum(-dphi, 1e-300), 0.0)
            denom = 1.0 + eta[:, None] * s2
            if np.all((num_sq / (denom * denom)).sum(axis=1) - self.target_sq
                      <= 1e-12 * self.tau ** 2 + 1e-300):
                break
        denom = 1.0 + eta[:, None] * s2
        shift = (eta[:, None] * (self.s * self.b) - eta[:, None] * s2 * A) / denom
        return Z + shift @ self.V.T

    def __call__(self, z):
        return self.project(z)[0]


def projected_subgradient_nuclear(M, y, tau, shape, iters=1_000_000, starts=5,
                                  seed=0, step_scale=None):
    """Independent oracle: min ||X||_* s.t. ||M vec(X) - y|| <= tau.

    Projected subgradient with diminishing steps from several random
    feasible starts; returns the best objective and iterate.  Slow by
    design; only run on small dense problems.
    """
    k, n = shape
    proj = DenseBallProjector(M, y, tau)
    rng = np.random.default_rng(seed)
    dtype = np.result_type(M.dtype, y.dtype)
    Z = rng.standard_normal((starts, k * n)).astype(np.float64)
    if np.issubdtype(dtype, np.complexfloating):
        Z = Z + 1j * rng.standard_normal((starts, k * n))
    Z = proj.project(Z.astype(dtype))
    if step_scale is None:
        # diminishing-step constant; small relative to the iterate scale so
        # the final objective noise sits well below the 1e-3 comparison band
        step_scale = 0.1 * max(1.0, float(np.mean(np.linalg.norm(Z, axis=1))))
    X = Z.reshape(starts, k, n)
    best_obj = np.full(starts, np.inf)
    best_X = X.copy()
    sqrt_steps = step_scale / np.sqrt(np.arange(1, iters + 1))
    for it in range(iters):
        U, s, Vh = np.linalg.svd(X, full_matrices=False)
        obj = s.sum(axis=1)
        improved = obj < best_obj
        if np.any(improved):
            best_obj = np.where(improved, obj, best_obj)
            best_X[improved] = X[improved]
        X = X - sqrt_steps[it] * (U @ Vh)   # U Vh is a nuclear-norm subgradient
        X = proj.project(X.reshape(starts, k * n)).reshape(starts, k, n)
    return float(best_obj.min()), best_X[int(np.argmin(best_obj))]


def feasible_probe_set(M, y, tau, shape, count, seed):
    """Random feasible points via the exact dense projection."""
    k, n = shape
    proj = DenseBallProjector(M, y, tau)
    rng = np.random.default_rng(seed)
    dtype = np.result_type(M.dtype, y.dtype)
    Z = rng.standard_normal((count, k * n))
    if np.issubdtype(dtype, np.complexfloating):
        Z = Z + 1j * rng.standard_normal((count, k * n))
    Z = Z * rng.uniform(0.1, 2.0, size=(count, 1))
    return [z.reshape(k, n) for z in proj.project(Z.astype(dtype))]
