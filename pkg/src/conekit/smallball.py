"""Monte Carlo verifiers for the probabilistic machinery.

Each check draws its own seeded stream, reports an empirical estimate with
a standard error, and passes or fails a one- or two-sided 3-sigma test
against a stated target.  Reports are plain data and serialize to JSON;
re-running with the same seed reproduces them bit-exactly.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ArgumentError, DimensionError
from .measurement import DeconvInstance, deconv_forward
from .numerics import complex_gaussian

MIN_TRIALS = 1000

PALEY_ZYGMUND_FLOOR = 9.0 / 32.0


@dataclass(frozen=True)
class MonteCarloReport:
    name: str
    trials: int
    estimate: float
    target: float
    stderr: float
    passed: bool
    seed: int
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return asdict(self)


def small_ball_count(inst: DeconvInstance, Z, xi: float) -> int:
    """``|{l : |<b_l c_l*, Z>_F| >= xi}|`` on the instance's realized rows."""
    if xi <= 0:
        raise ArgumentError("xi must be positive")
    return int(np.count_nonzero(np.abs(deconv_forward(inst, Z)) >= xi))


def paley_zygmund_check(b, X, xi: float, trials: int, seed: int) -> MonteCarloReport:
    """Anti-concentration floor for a single rank-one measurement.

    Draws ``c ~ CN(0, I)`` and estimates ``P(|<b c*, X>_F| >= 2 xi)``,
    which is at least 9/32 whenever ``||X* b|| >= 4 xi``.  Also verifies
    the second and fourth moment identities (``||X* b||^2`` and
    ``2 ||X* b||^4``) within five standard errors; those flags are stored
    in ``details``.
    """
    if trials < MIN_TRIALS:
        raise ArgumentError(f"need at least {MIN_TRIALS} trials for an asserted pass")
    b = np.asarray(b)
    X = np.asarray(X)
    if b.ndim != 1 or X.ndim != 2 or X.shape[0] != b.size:
        raise DimensionError("b must be a K-vector and X a K x N matrix")
    w = X.conj().T @ b  # X* b
    wn = float(np.linalg.norm(w))
    if xi <= 0 or wn < 4.0 * xi:
        raise ArgumentError("the floor requires ||X* b|| >= 4 xi > 0")
    rng = np.random.default_rng(seed)
    c = complex_gaussian(rng, (trials, X.shape[1]))
    vals = np.abs(c @ w.conj())
    hits = vals >= 2.0 * xi
    p = float(np.mean(hits))
    stderr = float(np.sqrt(max(p * (1.0 - p), 1e-12) / trials))
    passed = p >= PALEY_ZYGMUND_FLOOR - 3.0 * stderr

    v2 = vals ** 2
    v4 = vals ** 4
    m2, m2_se = float(np.mean(v2)), float(np.std(v2) / np.sqrt(trials))
    m4, m4_se = float(np.mean(v4)), float(np.std(v4) / np.sqrt(trials))
    details = {
        "second_moment": m2,
        "second_moment_target": wn ** 2,
        "second_moment_ok": bool(abs(m2 - wn ** 2) <= 5.0 * m2_se),
        "fourth_moment": m4,
        "fourth_moment_target": 2.0 * wn ** 4,
        "fourth_moment_ok": bool(abs(m4 - 2.0 * wn ** 4) <= 5.0 * m4_se),
        "profile_norm": wn,
    }
    return MonteCarloReport(name="paley_zygmund", trials=trials, estimate=p,
                            target=PALEY_ZYGMUND_FLOOR, stderr=stderr,
                            passed=bool(passed), seed=int(seed), details=details)


def projection_concentration_check(n: int, k: int, trials: int, eps: float,
                                   seed: int) -> MonteCarloReport:
    """Uniformly random k-dimensional projections of a fixed vector.

    Estimates ``E[||P z||^2 * n/k]`` for ``z = e1`` (target 1, two-sided
    3-sigma test) and reports the empirical rate at which the two-sided
    ``(1 +/- eps) k/n`` band fails; the band rate is informational because
    its tail constant is not specified.
    """
    if not 1 <= k <= n:
        raise DimensionError(f"need 1 <= k <= n, got n={n}, k={k}")
    if trials < MIN_TRIALS:
        raise ArgumentError(f"need at least {MIN_TRIALS} trials for an asserted pass")
    if eps <= 0:
        raise ArgumentError("eps must be positive")
    rng = np.random.default_rng(seed)
    vals = np.empty(trials)
    chunk = max(1, min(trials, int(2e6 // (n * k + 1)) or 1))
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        G = complex_gaussian(rng, (size, n, k))
        Q = np.linalg.qr(G)[0]
        # ||P e1||^2 = ||Q* e1||^2 = squared norm of the first row of Q
        vals[done:done + size] = np.sum(np.abs(Q[:, 0, :]) ** 2, axis=1)
        done += size
    scaled = vals * (n / k)
    mean = float(np.mean(scaled))
    stderr = float(np.std(scaled) / np.sqrt(trials))
    passed = abs(mean - 1.0) <= 3.0 * max(stderr, 1e-15)
    band_fail = float(np.mean((vals < (1 - eps) * k / n) | (vals > (1 + eps) * k / n)))
    return MonteCarloReport(name="projection_concentration", trials=trials,
                            estimate=mean, target=1.0, stderr=stderr,
                            passed=bool(passed), seed=int(seed),
                            details={"band_failure_rate": band_fail, "eps": eps,
                                     "n": n, "k": k})


def gaussian_width_sample(elements, trials: int, seed: int,
                          reference_upper: float | None = None) -> MonteCarloReport:
    """Sampled lower bound on the Gaussian width of a set.

    ``estimate = mean over Gaussian draws of max over the sampled elements
    of Re <X, G>_F``.  Because the supremum runs over a finite subset only,
    the estimate is a lower bound on the width of the full set; the report
    records that caveat.  When ``reference_upper`` is given (a known width
    upper bound for the full set), the report passes iff the sampled lower
    bound stays below it within three standard errors.
    """
    elements = [np.asarray(X) for X in elements]
    if len(elements) == 0:
        raise ArgumentError("need at least one sampled element")
    shape = elements[0].shape
    if any(X.shape != shape for X in elements):
        raise DimensionError("all sampled elements must share one shape")
    if trials < MIN_TRIALS:
        raise ArgumentError(f"need at least {MIN_TRIALS} trials for an asserted pass")
    stack = np.stack(elements).conj()  # S x K x N
    rng = np.random.default_rng(seed)
    sups = np.empty(trials)
    chunk = max(1, min(trials, int(4e6 // (max(stack.size, 1)) + 1)))
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        G = complex_gaussian(rng, (size, *shape))
        inner = np.real(np.tensordot(stack, G, axes=([1, 2], [1, 2])))  # S x size
        sups[done:done + size] = inner.max(axis=0)
        done += size
    est = float(np.mean(sups))
    stderr = float(np.std(sups) / np.sqrt(trials))
    if reference_upper is None:
        target, passed = 0.0, True
    else:
        target = float(reference_upper)
        passed = est <= target + 3.0 * max(stderr, 1e-15)
    return MonteCarloReport(name="gaussian_width_lower_bound", trials=trials,
                            estimate=est, target=target, stderr=stderr,
                            passed=bool(passed), seed=int(seed),
                            details={"lower_bound_only": True,
                                     "n_elements": len(elements)})
