"""Seeded experiment harness: sweeps, instability runs, and lemma checks.

Every experiment writes one CSV (and a JSON summary) into an output
directory.  Rows are emitted in a deterministic order and floats are
formatted with ``repr``, so identical configs and seeds produce
byte-identical CSVs regardless of the worker count.  Grid points that
violate a precondition become skip rows with a machine-readable reason;
bound columns are always accompanied by their event flags.
"""

from __future__ import annotations

import json
import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adversarial import (
    adversarial_noise,
    content_hash,
    deconv_certificate,
    mc_certificate,
    sample_descent_cone,
)
from .errors import AdmissibilityError, ArgumentError
from .frames import (
    b1_norm,
    coherence_mu_max,
    incoherence_mu,
    row_profile,
    spectral_tetris,
    weak_b1_norm,
)
from .geometry import (
    in_subdifferential,
    max_descent_step_bound,
    project_Tperp,
    tangent_space,
)
from .numerics import spectral_norm
from .measurement import (
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
from .numerics import complex_gaussian, frobenius_norm, nuclear_norm, re_inner
from .smallball import (
    gaussian_width_sample,
    paley_zygmund_check,
    projection_concentration_check,
    small_ball_count,
)
from .solver import SolverConfig, solve

CSV_SCHEMA_VERSION = 1

DEFAULT_DECONV_SCALING_GRID = [(s, 8 * s, 2 * s) for s in (9, 12, 16, 24, 32, 48)]
DEFAULT_COMPLETION_SCALING_GRID = [(n, n, 2, n * n // 40) for n in (40, 60, 80, 100)]
DEFAULT_DECONV_POINT = (12, 100, 24)
DEFAULT_COMPLETION_POINT = (100, 100, 2, 300)
DEFAULT_STABILITY_DIMS = (8, 8, 600)


def build_id() -> str:
    """git-describe style identifier of the working tree, with a fallback."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=10,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"conekit-{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"conekit-{__version__}+unknown"


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run.

    Loaded from a JSON file (same field names) with CLI flag overrides;
    unknown keys are rejected so typos fail loudly.
    """

    experiment: str = "scaling"
    base_seed: int = 0
    n_seeds: int = 25
    jobs: int = 1
    deconv_grid: list = field(default_factory=lambda: list(DEFAULT_DECONV_SCALING_GRID))
    completion_grid: list = field(default_factory=lambda: list(DEFAULT_COMPLETION_SCALING_GRID))
    t_grid: list = field(default_factory=lambda: [0.1, 0.5, 1.0])
    tau_fractions: list = field(default_factory=lambda: [1e-4, 3e-4, 1e-3, 3e-3,
                                                         1e-2, 3e-2, 0.1, 0.18, 0.3,
                                                         0.56, 1.0])
    stability_dims: tuple = DEFAULT_STABILITY_DIMS
    cone_samples: int = 400
    h0_policy: str = "anchor_orthogonal"
    solver_max_iters: int = 20_000
    solver_stop_tol_rel: float = 1e-7
    solver_feasibility_tol: float | None = None
    checks_trials: int = 100_000
    checks_samples: int = 200

    def solver_config(self) -> SolverConfig:
        return SolverConfig(max_iters=self.solver_max_iters,
                            stop_tol_rel=self.solver_stop_tol_rel,
                            feasibility_tol=self.solver_feasibility_tol)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ArgumentError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        if cfg.h0_policy not in ("anchor_orthogonal", "uniform"):
            raise ArgumentError(f"unknown h0_policy {cfg.h0_policy!r}")
        if cfg.n_seeds < 0 or cfg.jobs < 1:
            raise ArgumentError("n_seeds must be >= 0 and jobs >= 1")
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stability_dims"] = list(self.stability_dims)
        return d


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, columns, rows) -> None:
    path = Path(path)
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c)) for c in columns))
    path.write_text("\n".join(lines) + "\n")


def write_summary(path, payload: dict) -> None:
    payload = dict(payload)
    payload.setdefault("build_id", build_id())
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _instance_seed(base: int, tag: int, grid_index: int, seed_index: int):
    return [int(base), int(tag), int(grid_index), int(seed_index)]


def _draw_h0(policy: str, fm, rng) -> np.ndarray:
    """Left-factor draw for deconvolution sweeps.

    ``anchor_orthogonal`` uses flat magnitudes with random phases and zero
    mass on the block anchor columns.  The certificate is valid for every
    nonzero h0; this draw removes the h0-dependent cross term
    ``2 beta |<h0, e_anchor>|`` from ||Z||_F, which otherwise bends the
    desk-scale log-log fit of the ratio away from the sqrt(L/KN) law.
    ``uniform`` draws uniformly on the complex sphere.
    """
    K = fm.K
    if policy == "uniform":
        return random_unit_vector(rng, K)
    h = np.exp(2j * np.pi * rng.random(K))
    anchors = [3 * i for i in range(K // 3)]
    h[anchors] = 0.0
    n = np.linalg.norm(h)
    if n == 0:  # K < 3: no anchors removed is impossible, but stay safe
        h = np.ones(K, dtype=np.complex128)
        n = np.linalg.norm(h)
    return h / n


# ---------------------------------------------------------------------------
# scaling sweep


_SCALING_COLUMNS = [
    "schema_version", "problem", "grid_index", "K", "N", "L",
    "n1", "n2", "r", "m", "seed_index", "status", "skip_reason",
    "mu_max", "mu_h0", "event1", "event2", "beta", "ratio", "bound",
    "tau0", "z_norm", "margin", "cert_hash",
]


def _scaling_deconv_task(args):
    cfg_dict, gi, dims, j = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    K, N, L = dims
    base = {"schema_version": CSV_SCHEMA_VERSION, "problem": "deconv",
            "grid_index": gi, "K": K, "N": N, "L": L, "seed_index": j}
    if 2 * K > L or 36 * L > K * N or K < 3:
        return {**base, "status": "skip",
                "skip_reason": "requires 2K<=L<=KN/36 and K>=3"}
    seed = _instance_seed(cfg.base_seed, 1, gi, j)
    fm = spectral_tetris(L, K)
    rng = np.random.default_rng([*seed, 7])
    h0 = _draw_h0(cfg.h0_policy, fm, rng)
    m0 = random_unit_vector(rng, N)
    inst = deconv_instance(fm, N, h0, m0, seed)
    try:
        cert = deconv_certificate(inst)
    except AdmissibilityError as exc:
        return {**base, "status": "skip",
                "skip_reason": f"no admissible block ({len(exc.m_par_sq)} candidates)"}
    return {
        **base, "status": "ok",
        "mu_max": coherence_mu_max(fm), "mu_h0": incoherence_mu(fm, h0),
        "event1": cert.event1_holds, "event2": cert.event2_holds,
        "beta": cert.beta, "ratio": cert.ratio,
        "bound": 12.0 * math.sqrt(L / (K * N)),
        "tau0": cert.tau0, "z_norm": frobenius_norm(cert.Z),
        "margin": cert.margin, "cert_hash": content_hash(cert),
    }


def _scaling_completion_task(args):
    cfg_dict, gi, dims, j = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    n1, n2, r, m = dims
    base = {"schema_version": CSV_SCHEMA_VERSION, "problem": "completion",
            "grid_index": gi, "n1": n1, "n2": n2, "r": r, "m": m, "seed_index": j}
    if n1 < n2 or 32 * m > n1 * n2 or r < 1 or r > n2:
        return {**base, "status": "skip",
                "skip_reason": "requires n1>=n2, 1<=r<=n2, m<=n1*n2/32"}
    seed = _instance_seed(cfg.base_seed, 2, gi, j)
    X0 = haar_lowrank(n1, n2, r, [*seed, 11])
    inst = completion_instance(X0, m, seed)
    cert = mc_certificate(inst)
    return {
        **base, "status": "ok",
        "event1": cert.event1_holds, "event2": cert.event2_holds,
        "beta": cert.beta, "ratio": cert.ratio,
        "bound": 8.0 * math.sqrt(m / (r * n1 * n2)),
        "tau0": cert.tau0, "z_norm": frobenius_norm(cert.Z),
        "margin": cert.margin, "cert_hash": content_hash(cert),
    }


def _run_tasks(task_fn, payloads, jobs: int):
    if jobs <= 1 or len(payloads) <= 1:
        return [task_fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task_fn, payloads))


def fit_scaling_slope(points):
    """Least-squares slope/intercept of log(median ratio) vs log(dimension factor)."""
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    if xs.size < 2:
        return float("nan"), float("nan")
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(slope), float(intercept)


def run_scaling_sweep(cfg: ExperimentConfig, out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg_dict = cfg.to_dict()
    payloads = [(cfg_dict, gi, tuple(dims), j)
                for gi, dims in enumerate(cfg.deconv_grid)
                for j in range(cfg.n_seeds)]
    rows = _run_tasks(_scaling_deconv_task, payloads, cfg.jobs)
    payloads = [(cfg_dict, gi, tuple(dims), j)
                for gi, dims in enumerate(cfg.completion_grid)
                for j in range(cfg.n_seeds)]
    rows += _run_tasks(_scaling_completion_task, payloads, cfg.jobs)
    rows.sort(key=lambda r: (r["problem"], r["grid_index"], r["seed_index"]))
    csv_path = out_dir / "scaling.csv"
    write_csv(csv_path, _SCALING_COLUMNS, rows)

    points = []
    for gi, (K, N, L) in enumerate(cfg.deconv_grid):
        ratios = [r["ratio"] for r in rows
                  if r["problem"] == "deconv" and r["grid_index"] == gi
                  and r["status"] == "ok"]
        if ratios:
            points.append((math.log(math.sqrt(L / (K * N))),
                           math.log(float(np.median(ratios))),
                           {"K": K, "N": N, "L": L,
                            "median_ratio": float(np.median(ratios)),
                            "n_ok": len(ratios)}))
    slope, intercept = fit_scaling_slope([(x, y) for x, y, _ in points])
    comp_rows = [r for r in rows if r["problem"] == "completion" and r["status"] == "ok"]
    comp_event_rows = [r for r in comp_rows if r["event1"] and r["event2"]]
    summary = {
        "experiment": "scaling",
        "schema_version": CSV_SCHEMA_VERSION,
        "csv": csv_path.name,
        "config": cfg_dict,
        "deconv": {
            "slope": slope,
            "intercept": intercept,
            "points": [meta for _, _, meta in points],
        },
        "completion": {
            "n_rows": len(comp_rows),
            "n_event_rows": len(comp_event_rows),
            "bound_violations": sum(1 for r in comp_event_rows if r["ratio"] > r["bound"]),
        },
    }
    write_summary(out_dir / "scaling_summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# instability runs


_INSTABILITY_COLUMNS = [
    "schema_version", "problem", "grid_index", "K", "N", "L",
    "n1", "n2", "r", "m", "seed_index", "t", "status", "skip_reason",
    "tau", "tau0", "event1", "event2",
    "dist_xtilde", "dist_xhat", "dist_lower_bound",
    "nuc_x0", "nuc_xtilde", "nuc_xhat", "nuclear_gap",
    "xtilde_feas_dev", "solver_iters", "solver_converged", "cert_hash",
]


def _instability_rows_for(problem, cfg, gi, dims, j):
    rows = []
    base = {"schema_version": CSV_SCHEMA_VERSION, "problem": problem,
            "grid_index": gi, "seed_index": j}
    if problem == "deconv":
        K, N, L = dims
        base.update(K=K, N=N, L=L)
        if 2 * K > L or 36 * L > K * N or K < 3:
            return [{**base, "t": t, "status": "skip",
                     "skip_reason": "requires 2K<=L<=KN/36 and K>=3"}
                    for t in cfg.t_grid]
        seed = _instance_seed(cfg.base_seed, 3, gi, j)
        fm = spectral_tetris(L, K)
        rng = np.random.default_rng([*seed, 7])
        h0 = _draw_h0(cfg.h0_policy, fm, rng)
        m0 = random_unit_vector(rng, N)
        inst = deconv_instance(fm, N, h0, m0, seed)
        try:
            cert = deconv_certificate(inst)
        except AdmissibilityError as exc:
            return [{**base, "t": t, "status": "skip",
                     "skip_reason": f"no admissible block ({len(exc.m_par_sq)} candidates)"}
                    for t in cfg.t_grid]
        forward = lambda X: deconv_forward(inst, X)
        adjoint = lambda v: deconv_adjoint(inst, v)
        shape, X0 = (K, N), inst.x0()
        c3, dim_factor = 12.0, math.sqrt(K * N / L)
    else:
        n1, n2, r, m = dims
        base.update(n1=n1, n2=n2, r=r, m=m)
        if n1 < n2 or 32 * m > n1 * n2 or r < 1 or r > n2:
            return [{**base, "t": t, "status": "skip",
                     "skip_reason": "requires n1>=n2, 1<=r<=n2, m<=n1*n2/32"}
                    for t in cfg.t_grid]
        seed = _instance_seed(cfg.base_seed, 4, gi, j)
        X0 = haar_lowrank(n1, n2, r, [*seed, 11])
        inst = completion_instance(X0, m, seed)
        cert = mc_certificate(inst)
        forward = lambda X: mc_forward(inst, X)
        adjoint = lambda v: mc_adjoint(inst, v)
        shape = (n1, n2)
        c3, dim_factor = 8.0, math.sqrt(r * n1 * n2 / m)

    nuc_x0 = nuclear_norm(X0)
    for t in cfg.t_grid:
        e, y, x_tilde, report = adversarial_noise(cert, inst, t)
        tau = t * report["tau0"]
        res = solve(forward, adjoint, y, tau, shape, cfg.solver_config())
        nuc_xtilde = nuclear_norm(x_tilde)
        rows.append({
            **base, "t": float(t), "status": "ok",
            "tau": tau, "tau0": report["tau0"],
            "event1": cert.event1_holds, "event2": cert.event2_holds,
            "dist_xtilde": report["distance"],
            "dist_xhat": frobenius_norm(res.X_hat - X0),
            "dist_lower_bound": (tau / c3) * dim_factor,
            "nuc_x0": nuc_x0, "nuc_xtilde": nuc_xtilde,
            "nuc_xhat": res.objective,
            "nuclear_gap": nuc_xtilde - res.objective,
            "xtilde_feas_dev": report["feasibility_deviation"],
            "solver_iters": res.iterations,
            "solver_converged": res.converged,
            "cert_hash": content_hash(cert),
        })
    return rows


def _instability_task(args):
    cfg_dict, problem, gi, dims, j = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    return _instability_rows_for(problem, cfg, gi, dims, j)


def run_instability(cfg: ExperimentConfig, out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg_dict = cfg.to_dict()
    payloads = [(cfg_dict, "deconv", gi, tuple(d), j)
                for gi, d in enumerate(cfg.deconv_grid) for j in range(cfg.n_seeds)]
    payloads += [(cfg_dict, "completion", gi, tuple(d), j)
                 for gi, d in enumerate(cfg.completion_grid) for j in range(cfg.n_seeds)]
    nested = _run_tasks(_instability_task, payloads, cfg.jobs)
    rows = [row for chunk in nested for row in chunk]
    rows.sort(key=lambda r: (r["problem"], r["grid_index"], r["seed_index"], r["t"]))
    csv_path = out_dir / "instability.csv"
    write_csv(csv_path, _INSTABILITY_COLUMNS, rows)
    ok_rows = [r for r in rows if r["status"] == "ok"]
    summary = {
        "experiment": "instability",
        "schema_version": CSV_SCHEMA_VERSION,
        "csv": csv_path.name,
        "config": cfg_dict,
        "n_rows": len(rows),
        "n_ok": len(ok_rows),
        "feasibility_max_dev": max((r["xtilde_feas_dev"] for r in ok_rows), default=0.0),
        "distance_bound_violations": sum(
            1 for r in ok_rows if r["dist_xtilde"] < r["dist_lower_bound"] - 1e-12
        ),
        "preference_violations": sum(
            1 for r in ok_rows if r["nuc_xtilde"] > r["nuc_x0"] + 1e-9
        ),
    }
    write_summary(out_dir / "instability_summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# stability sweep


_STABILITY_COLUMNS = [
    "schema_version", "K", "N", "L", "seed_index", "noise_kind",
    "tau_frac", "tau", "err", "err_over_tau", "nuc_xhat",
    "solver_iters", "solver_converged", "mu_h0",
    "flattest_ratio", "flattest_alignment", "sigma_min_dense",
]


def _flat_incoherent_h0(K: int, rng) -> np.ndarray:
    h = np.exp(2j * np.pi * rng.random(K)) / np.sqrt(K)
    return h


def run_stability_sweep(cfg: ExperimentConfig, out_dir) -> dict:
    """Reconstruction error against the noise level for one deconv geometry.

    Records both the worst sampled descent-cone noise direction and a
    random direction at every noise level, plus the dense-operator lower
    bound ``sigma_min`` that caps how adversarial any direction can be.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    K, N, L = cfg.stability_dims
    rows = []
    for j in range(max(cfg.n_seeds, 1)):
        seed = _instance_seed(cfg.base_seed, 5, 0, j)
        fm = spectral_tetris(L, K)
        rng = np.random.default_rng([*seed, 7])
        h0 = _flat_incoherent_h0(K, rng)
        m0 = random_unit_vector(rng, N)
        inst = deconv_instance(fm, N, h0, m0, seed)
        X0 = inst.x0()
        x0_norm = frobenius_norm(X0)
        forward = lambda X: deconv_forward(inst, X)
        adjoint = lambda v: deconv_adjoint(inst, v)

        dense = materialize(forward, (K, N), dtype=np.complex128)
        dense_sv = np.linalg.svd(dense, compute_uv=False)
        sigma_min = float(dense_sv[-1])
        op_norm = float(dense_sv[0])

        samples = sample_descent_cone(fm, X0, cfg.cone_samples, [*seed, 13])
        ratios = [float(np.linalg.norm(forward(s.Z))) for s in samples]
        i_flat = int(np.argmin(ratios))
        z_flat = samples[i_flat].Z
        flat_ratio = ratios[i_flat]
        flat_align = samples[i_flat].alignment
        mu_h0 = incoherence_mu(fm, h0)

        e_cert_dir = forward(z_flat)
        e_cert_dir = e_cert_dir / np.linalg.norm(e_cert_dir)
        rng_noise = np.random.default_rng([*seed, 17])
        e_rand_dir = complex_gaussian(rng_noise, L)
        e_rand_dir = e_rand_dir / np.linalg.norm(e_rand_dir)

        y_clean = forward(X0)
        for kind, direction in (("certificate", e_cert_dir), ("random", e_rand_dir)):
            for frac in cfg.tau_fractions:
                tau = frac * x0_norm
                e = tau * direction
                res = solve(forward, adjoint, y_clean + e, tau, (K, N),
                            cfg.solver_config(), operator_norm=op_norm)
                err = frobenius_norm(res.X_hat - X0)
                rows.append({
                    "schema_version": CSV_SCHEMA_VERSION,
                    "K": K, "N": N, "L": L, "seed_index": j,
                    "noise_kind": kind, "tau_frac": float(frac), "tau": tau,
                    "err": err, "err_over_tau": err / tau if tau > 0 else float("inf"),
                    "nuc_xhat": res.objective,
                    "solver_iters": res.iterations,
                    "solver_converged": res.converged,
                    "mu_h0": mu_h0,
                    "flattest_ratio": flat_ratio,
                    "flattest_alignment": flat_align,
                    "sigma_min_dense": sigma_min,
                })
    rows.sort(key=lambda r: (r["seed_index"], r["noise_kind"], r["tau_frac"]))
    csv_path = out_dir / "stability.csv"
    write_csv(csv_path, _STABILITY_COLUMNS, rows)

    def _ratio_at(kind, frac, j=0):
        for r in rows:
            if (r["noise_kind"] == kind and r["seed_index"] == j
                    and abs(r["tau_frac"] - frac) < 1e-12):
                return r["err_over_tau"]
        return None

    upper = [r for r in rows if r["seed_index"] == 0
             and r["noise_kind"] == "certificate" and 0.1 <= r["tau_frac"] <= 1.0]
    upper_ratios = [r["err_over_tau"] for r in upper]
    xs = np.log([r["tau"] for r in upper])
    ys = np.log([max(r["err"], 1e-300) for r in upper])
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(upper) >= 2 else float("nan")
    small = _ratio_at("certificate", 1e-3)
    knee = _ratio_at("certificate", 0.3)
    summary = {
        "experiment": "stability",
        "schema_version": CSV_SCHEMA_VERSION,
        "csv": csv_path.name,
        "config": cfg.to_dict(),
        "upper_decade_ratio_spread": (max(upper_ratios) / min(upper_ratios)
                                      if upper_ratios else float("nan")),
        "upper_decade_slope": slope,
        "transition_factor": (small / knee if small and knee else float("nan")),
        "err_over_tau_small": small,
        "err_over_tau_knee": knee,
        "sigma_min_dense": rows[0]["sigma_min_dense"] if rows else float("nan"),
        "flattest_ratio": rows[0]["flattest_ratio"] if rows else float("nan"),
    }
    write_summary(out_dir / "stability_summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# lemma checks


def _check(passed, **stats):
    entry = {"passed": bool(passed)}
    entry.update({k: (float(v) if isinstance(v, (np.floating, np.integer)) else v)
                  for k, v in stats.items()})
    return entry


def run_checks(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Deterministic lemma checks plus the Monte Carlo verifiers, in one report."""
    results = {}
    seed0 = cfg.base_seed

    # B1 sandwich: weak <= strong <= log(eL) * weak, on random matrices
    fm = spectral_tetris(24, 12)
    rng = np.random.default_rng([seed0, 101])
    worst = 0.0
    ok = True
    for _ in range(100):
        W = complex_gaussian(rng, (12, 7))
        wk, st = weak_b1_norm(fm, W), b1_norm(fm, W)
        factor = math.log(math.e * fm.L)
        ok &= wk <= st + 1e-9 and st <= factor * wk + 1e-9
        worst = max(worst, st / max(wk, 1e-300))
    results["b1_sandwich"] = _check(ok, worst_ratio=worst,
                                    factor=math.log(math.e * 24), seed=seed0)

    # B1 lower bound on sampled well-aligned cone members
    K, N, L = 8, 8, 16
    fm2 = spectral_tetris(L, K)
    rng = np.random.default_rng([seed0, 102])
    h0 = random_unit_vector(rng, K)
    m0 = random_unit_vector(rng, N)
    X0 = np.outer(h0, m0.conj())
    mu = incoherence_mu(fm2, h0)
    samples = sample_descent_cone(fm2, X0, cfg.checks_samples, [seed0, 103])
    ok = True
    worst_gap = float("inf")
    for s in samples:
        if s.alignment <= 0:
            continue
        lower = s.alignment * math.sqrt(L) / mu
        val = b1_norm(fm2, s.Z)
        ok &= val >= lower - 1e-9
        worst_gap = min(worst_gap, val - lower)
    results["b1_lower_bound"] = _check(ok, worst_gap=worst_gap, mu=mu,
                                       n_samples=len(samples), seed=seed0)

    # large-entries count for unit-Frobenius matrices
    rng = np.random.default_rng([seed0, 104])
    ok = True
    for _ in range(cfg.checks_samples):
        Z = complex_gaussian(rng, (12, 7))
        Z /= frobenius_norm(Z)
        prof = row_profile(fm, Z)
        bnorm = prof.sum()
        thresh = bnorm / (fm.L * math.log(math.e * fm.L))
        count = int(np.count_nonzero(prof >= thresh))
        ok &= count >= bnorm ** 2 / math.log(math.e * fm.L) ** 2 - 1e-9
    results["large_entries"] = _check(ok, n_samples=cfg.checks_samples, seed=seed0)

    # maximal-descent bound, verified by scanning step lengths
    rng = np.random.default_rng([seed0, 105])
    ok = True
    t_grid = np.linspace(0.01, 3.0, 60)
    for _ in range(cfg.checks_samples):
        u = random_unit_vector(rng, 6)
        v = random_unit_vector(rng, 5)
        X = np.outer(u, v.conj()) * rng.uniform(0.5, 2.0)
        Z = complex_gaussian(rng, (6, 5))
        Z /= frobenius_norm(Z)
        bound = max_descent_step_bound(X, Z)
        nuc0 = nuclear_norm(X)
        for t in t_grid:
            if nuclear_norm(X + t * Z) <= nuc0 + 1e-12:
                ok &= t <= bound + 1e-9
    results["maximal_descent"] = _check(ok, n_samples=cfg.checks_samples, seed=seed0)

    # Paley-Zygmund floor at the boundary case ||X* b|| = 4 xi
    rng = np.random.default_rng([seed0, 106])
    X = complex_gaussian(rng, (6, 8))
    b = random_unit_vector(rng, 6)
    xi = float(np.linalg.norm(X.conj().T @ b)) / 4.0
    pz = paley_zygmund_check(b, X, xi, cfg.checks_trials, seed0 + 1000)
    results["paley_zygmund"] = {"passed": pz.passed and pz.details["second_moment_ok"]
                                and pz.details["fourth_moment_ok"],
                                **pz.to_json_dict()}

    # projection concentration, mean test
    pc = projection_concentration_check(100, 10, max(cfg.checks_trials // 10, 1000),
                                        0.5, seed0 + 2000)
    results["projection_concentration"] = {"passed": pc.passed, **pc.to_json_dict()}

    # Markov-type sanity for the small-ball count, deterministic
    inst = deconv_instance(spectral_tetris(16, 8), 8,
                           random_unit_vector(np.random.default_rng([seed0, 107]), 8),
                           random_unit_vector(np.random.default_rng([seed0, 108]), 8),
                           [seed0, 109])
    Zs = complex_gaussian(np.random.default_rng([seed0, 110]), (8, 8))
    Zs /= frobenius_norm(Zs)
    vals = np.abs(deconv_forward(inst, Zs))
    xi = float(np.median(vals[vals > 0])) if np.any(vals > 0) else 1.0
    count = small_ball_count(inst, Zs, xi)
    results["small_ball_markov"] = _check(count * xi <= vals.sum() + 1e-12,
                                          count=count, xi=xi, seed=seed0)

    # cross-module: mean measured count at 2 xi vs the anti-concentration
    # floor applied to the large-entry count at 4 xi, in expectation
    rngz = np.random.default_rng([seed0, 111])
    Zc = complex_gaussian(rngz, (8, 8))
    Zc /= frobenius_norm(Zc)
    prof = row_profile(fm2, Zc)
    bn = prof.sum()
    xi_lemma = bn / (4.0 * fm2.L * math.log(math.e * fm2.L))
    large_count = int(np.count_nonzero(prof >= 4.0 * xi_lemma))
    counts = []
    n_seeds_cross = 50
    for jj in range(n_seeds_cross):
        inst_j = deconv_instance(fm2, 8, np.ones(8) / np.sqrt(8.0),
                                 np.ones(8) / np.sqrt(8.0), [seed0, 112, jj])
        counts.append(small_ball_count(inst_j, Zc, 2.0 * xi_lemma))
    mean_count = float(np.mean(counts))
    se = float(np.std(counts) / np.sqrt(n_seeds_cross))
    floor = (9.0 / 32.0) * large_count
    results["small_ball_vs_large_entries"] = _check(
        mean_count >= floor - 3.0 * se, mean_count=mean_count,
        floor=floor, stderr=se, n_seeds=n_seeds_cross, seed=seed0)

    # Gaussian width samples: singleton pair with a closed form, plus a
    # sampled descent-cone slice against the 2 sqrt(K+N) reference bound
    E1 = np.zeros((4, 4)); E1[0, 0] = 1.0
    gw = gaussian_width_sample([E1, -E1], max(cfg.checks_trials // 10, 1000),
                               seed0 + 3000)
    half_normal_mean = 1.0 / math.sqrt(math.pi)  # E|Re g|, Re g ~ N(0, 1/2)
    gw_ok = abs(gw.estimate - half_normal_mean) <= 3.0 * gw.stderr
    results["gaussian_width_singleton"] = {"passed": bool(gw_ok),
                                           "closed_form": half_normal_mean,
                                           **gw.to_json_dict()}
    cone_elems = [s.Z for s in sample_descent_cone(fm2, X0, 64, [seed0, 113])]
    gw2 = gaussian_width_sample(cone_elems, max(cfg.checks_trials // 10, 1000),
                                seed0 + 4000,
                                reference_upper=2.0 * math.sqrt(K + N))
    results["gaussian_width_cone"] = {"passed": gw2.passed, **gw2.to_json_dict()}

    # geometry duality spot check: subgradients vs cone members
    rng = np.random.default_rng([seed0, 114])
    ok = True
    for _ in range(50):
        u = random_unit_vector(rng, 6)
        v = random_unit_vector(rng, 5)
        Xr = np.outer(u, v.conj())
        ts = tangent_space(Xr)
        Gperp = project_Tperp(ts, complex_gaussian(rng, (6, 5)))
        Wsub = ts.uv_star + 0.9 * Gperp / max(spectral_norm(Gperp), 1e-300)
        assert in_subdifferential(Xr, Wsub).member
        for s in sample_descent_cone(None, Xr, 4, rng.integers(0, 2 ** 31)):
            ok &= re_inner(Wsub, s.Z) <= 1e-8
    results["subdifferential_cone_duality"] = _check(ok, seed=seed0)

    report = {
        "experiment": "checks",
        "schema_version": CSV_SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "all_passed": all(v["passed"] for v in results.values()),
        "checks": results,
    }
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_summary(out_dir / "checks.json", report)
    return report
