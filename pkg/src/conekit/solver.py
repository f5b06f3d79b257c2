"""First-order solver for constrained nuclear-norm minimization.

Solves ``minimize ||X||_*  subject to  ||A(X) - y|| <= tau`` over real or
complex matrices through a primal-dual splitting: the nuclear norm enters
via its proximal map (singular-value soft-thresholding), the constraint
through its conjugate via the Moreau identity, whose inner step is the
exact Euclidean projection onto the ball around ``y``; the primal iterate
is extrapolated with weight one.  Convergence requires
``primal_step * dual_step * ||A||^2 <= 1``.

``tau = 0`` runs through the same code path (the ball degenerates to the
point ``y``), so noiseless equality-constrained problems need no special
casing.  The solver returns its limit point; when the program has multiple
minimizers no canonicalization is attempted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ConfigError
from .measurement import operator_norm_estimate


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 50_000
    primal_step: float | None = None   # None: 1 / ||A|| for both steps
    dual_step: float | None = None
    stop_tol_rel: float = 1e-6
    feasibility_tol: float | None = None  # None: 1e-8 * max(1, ||y||)
    log_every: int = 50

    def validate(self, operator_norm: float) -> tuple[float, float]:
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.stop_tol_rel <= 0:
            raise ConfigError("stop_tol_rel must be positive")
        if self.feasibility_tol is not None and self.feasibility_tol <= 0:
            raise ConfigError("feasibility_tol must be positive")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")
        if (self.primal_step is None) != (self.dual_step is None):
            raise ConfigError("set both primal_step and dual_step, or neither")
        if self.primal_step is None:
            step = 1.0 / max(operator_norm, 1e-300)
            return step, step
        if self.primal_step <= 0 or self.dual_step <= 0:
            raise ConfigError("step sizes must be positive")
        if self.primal_step * self.dual_step * operator_norm ** 2 > 1.0 + 1e-12:
            raise ConfigError(
                "step-size product times ||A||^2 exceeds 1; the splitting may diverge"
            )
        return self.primal_step, self.dual_step


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    objective: float
    feasibility_residual: float
    rel_change: float
    avg_feasibility_residual: float


@dataclass(frozen=True)
class SolverResult:
    X_hat: np.ndarray
    iterations: int
    objective: float
    feasibility_residual: float    # max(0, ||A(X_hat) - y|| - tau)
    converged: bool
    trace: list = field(default_factory=list)


def project_ball(v, y, tau: float) -> np.ndarray:
    """Euclidean projection onto ``{u : ||u - y|| <= tau}``."""
    if tau < 0:
        raise ArgumentError("tau must be nonnegative")
    v = np.asarray(v)
    y = np.asarray(y)
    d = v - y
    nd = float(np.linalg.norm(d))
    if nd <= tau:
        return v
    if tau == 0.0:
        return y.copy()
    return y + (tau / nd) * d


def svt(X, threshold: float) -> np.ndarray:
    """Singular-value soft-thresholding, the proximal map of the nuclear norm."""
    M, _ = _svt_with_objective(X, threshold)
    return M


def _svt_with_objective(X, threshold: float):
    if threshold < 0:
        raise ArgumentError("threshold must be nonnegative")
    X = np.asarray(X)
    U, s, Vh = np.linalg.svd(X, full_matrices=False)
    s = np.maximum(s - threshold, 0.0)
    return (U * s) @ Vh, float(s.sum())


def solve(forward, adjoint, y, tau: float, shape, config: SolverConfig | None = None,
          operator_norm: float | None = None) -> SolverResult:
    """Run the splitting until the iterate settles and is feasible.

    ``forward``/``adjoint`` must be an adjoint pair under the real inner
    product (the measurement module's contract).  Non-convergence within
    ``max_iters`` is reported through the ``converged`` flag, not an
    exception.
    """
    if tau < 0:
        raise ArgumentError("tau must be nonnegative")
    y = np.asarray(y)
    config = config or SolverConfig()
    if operator_norm is None:
        operator_norm = operator_norm_estimate(forward, adjoint, shape)
    primal_step, dual_step = config.validate(operator_norm)
    feas_tol = config.feasibility_tol
    if feas_tol is None:
        feas_tol = 1e-8 * max(1.0, float(np.linalg.norm(y)))

    probe = np.asarray(adjoint(y))
    dtype = probe.dtype
    X = np.zeros(shape, dtype=dtype)
    X_bar = X.copy()
    lam = np.zeros_like(y)
    X_sum = np.zeros_like(X)

    trace = []
    objective = 0.0
    converged = False
    iterations = 0
    for it in range(1, config.max_iters + 1):
        v = lam + dual_step * forward(X_bar)
        lam = v - dual_step * project_ball(v / dual_step, y, tau)
        X_new, objective = _svt_with_objective(X - primal_step * adjoint(lam), primal_step)
        X_bar = 2.0 * X_new - X
        rel_change = float(np.linalg.norm(X_new - X)) / max(1.0, float(np.linalg.norm(X_new)))
        X = X_new
        X_sum += X
        iterations = it
        feas = max(0.0, float(np.linalg.norm(forward(X) - y)) - tau)
        if it % config.log_every == 0 or it == 1:
            avg_feas = max(0.0, float(np.linalg.norm(forward(X_sum / it) - y)) - tau)
            trace.append(TracePoint(it, objective, feas, rel_change, avg_feas))
        if rel_change <= config.stop_tol_rel and feas <= feas_tol:
            converged = True
            break
    feas_final = max(0.0, float(np.linalg.norm(forward(X) - y)) - tau)
    return SolverResult(X_hat=X, iterations=iterations, objective=objective,
                        feasibility_residual=feas_final, converged=converged,
                        trace=trace)


def write_trace_csv(result: SolverResult, path) -> None:
    """Iteration trace as CSV: iter, objective, feasibility_residual, rel_change."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "objective", "feasibility_residual", "rel_change",
                         "avg_feasibility_residual"])
        for p in result.trace:
            writer.writerow([p.iteration, repr(p.objective), repr(p.feasibility_residual),
                             repr(p.rel_change), repr(p.avg_feasibility_residual)])
