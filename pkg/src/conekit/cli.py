"""Command-line interface.

Subcommands: ``frame``, ``deconv-cert``, ``mc-cert``, ``solve``,
``sweep-scaling``, ``sweep-instability``, ``sweep-stability``, ``checks``.
Global flags: ``--seed``, ``--config``, ``--out``, ``--jobs``.  Config
files are JSON documents whose keys mirror
:class:`conekit.harness.ExperimentConfig`; command-line flags win over the
file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .adversarial import deconv_certificate, mc_certificate, save_certificate
from .errors import ConekitError
from .frames import coherence_mu_max, haar_frame, save_frame, spectral_tetris
from .harness import (
    ExperimentConfig,
    run_checks,
    run_instability,
    run_scaling_sweep,
    run_stability_sweep,
)
from .measurement import (
    CompletionInstance,
    DeconvInstance,
    completion_instance,
    deconv_adjoint,
    deconv_forward,
    deconv_instance,
    haar_lowrank,
    load_instance,
    mc_adjoint,
    mc_forward,
    random_unit_vector,
    save_instance,
)
from .solver import SolverConfig, solve, write_trace_csv


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
    cfg = ExperimentConfig.from_dict(data)
    cfg.base_seed = args.seed if args.seed is not None else cfg.base_seed
    cfg.jobs = args.jobs if args.jobs is not None else cfg.jobs
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_frame(args) -> int:
    if args.kind == "tetris":
        fm = spectral_tetris(args.L, args.K)
    else:
        fm = haar_frame(args.L, args.K, args.seed or 0)
    out = _out_dir(args)
    save_frame(fm, out / f"frame_{fm.kind}_{fm.L}x{fm.K}")
    print(f"frame kind={fm.kind} L={fm.L} K={fm.K} mu_max={coherence_mu_max(fm):.6f}")
    print(f"written to {out}")
    return 0


def _cmd_deconv_cert(args) -> int:
    seed = args.seed or 0
    fm = spectral_tetris(args.L, args.K)
    rng = np.random.default_rng([seed, 7])
    h0 = random_unit_vector(rng, args.K)
    m0 = random_unit_vector(rng, args.N)
    inst = deconv_instance(fm, args.N, h0, m0, seed)
    cert = deconv_certificate(inst)
    out = _out_dir(args)
    save_instance(inst, out / "deconv_instance")
    save_certificate(cert, out / "deconv_certificate")
    bound = 12.0 * np.sqrt(args.L / (args.K * args.N))
    print(f"block={cert.block_index} ratio={cert.ratio:.6f} bound={bound:.6f} "
          f"tau0={cert.tau0:.6f} events=({cert.event1_holds},{cert.event2_holds})")
    return 0


def _cmd_mc_cert(args) -> int:
    seed = args.seed or 0
    X0 = haar_lowrank(args.n1, args.n2, args.r, [seed, 11])
    inst = completion_instance(X0, args.m, seed)
    cert = mc_certificate(inst)
    out = _out_dir(args)
    save_instance(inst, out / "completion_instance")
    save_certificate(cert, out / "completion_certificate")
    bound = 8.0 * np.sqrt(args.m / (args.r * args.n1 * args.n2))
    print(f"row={cert.row_index} ratio={cert.ratio:.6f} bound={bound:.6f} "
          f"tau0={cert.tau0:.6f} events=({cert.event1_holds},{cert.event2_holds})")
    return 0


def _cmd_solve(args) -> int:
    inst = load_instance(Path(args.instance))
    if isinstance(inst, DeconvInstance):
        forward = lambda X: deconv_forward(inst, X)
        adjoint = lambda v: deconv_adjoint(inst, v)
        shape, X0 = (inst.K, inst.N), inst.x0()
    elif isinstance(inst, CompletionInstance):
        forward = lambda X: mc_forward(inst, X)
        adjoint = lambda v: mc_adjoint(inst, v)
        shape, X0 = (inst.n1, inst.n2), inst.X0
    else:  # pragma: no cover
        raise ConekitError("unknown instance type")
    cfg = SolverConfig(max_iters=args.max_iters)
    res = solve(forward, adjoint, inst.y(), inst.tau, shape, cfg)
    err = float(np.linalg.norm(res.X_hat - X0))
    print(f"iterations={res.iterations} converged={res.converged} "
          f"objective={res.objective:.8f} feasibility={res.feasibility_residual:.3e} "
          f"err_vs_truth={err:.6e}")
    out = _out_dir(args)
    np.save(out / "x_hat.npy", res.X_hat)
    if args.trace:
        write_trace_csv(res, out / "trace.csv")
        print(f"trace written to {out / 'trace.csv'}")
    return 0


def _cmd_sweep(args, runner) -> int:
    cfg = _load_config(args)
    summary = runner(cfg, _out_dir(args))
    print(json.dumps({k: v for k, v in summary.items() if k != "config"},
                     indent=2, sort_keys=True, default=str))
    return 0


def _cmd_checks(args) -> int:
    cfg = _load_config(args)
    report = run_checks(cfg, _out_dir(args))
    for name, entry in report["checks"].items():
        print(f"{'PASS' if entry['passed'] else 'FAIL'} {name}")
    print(f"all_passed={report['all_passed']}")
    return 0 if report["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conekit",
                                description="descent-cone geometry experiments")
    p.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    p.add_argument("--config", type=str, default=None, help="JSON config path")
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("frame", help="build and export a frame")
    f.add_argument("--L", type=int, required=True)
    f.add_argument("--K", type=int, required=True)
    f.add_argument("--kind", choices=["tetris", "haar"], default="tetris")
    f.set_defaults(fn=_cmd_frame)

    d = sub.add_parser("deconv-cert", help="build a deconvolution certificate")
    d.add_argument("--K", type=int, default=12)
    d.add_argument("--N", type=int, default=100)
    d.add_argument("--L", type=int, default=24)
    d.set_defaults(fn=_cmd_deconv_cert)

    m = sub.add_parser("mc-cert", help="build a completion certificate")
    m.add_argument("--n1", type=int, default=100)
    m.add_argument("--n2", type=int, default=100)
    m.add_argument("--r", type=int, default=2)
    m.add_argument("--m", type=int, default=300)
    m.set_defaults(fn=_cmd_mc_cert)

    s = sub.add_parser("solve", help="solve a serialized instance")
    s.add_argument("--instance", type=str, required=True,
                   help="path prefix of an instance saved by the library")
    s.add_argument("--max-iters", type=int, default=50_000)
    s.add_argument("--trace", action="store_true")
    s.set_defaults(fn=_cmd_solve)

    for name, runner in (("sweep-scaling", run_scaling_sweep),
                         ("sweep-instability", run_instability),
                         ("sweep-stability", run_stability_sweep)):
        sp = sub.add_parser(name, help=f"run the {name.split('-')[1]} experiment")
        sp.set_defaults(fn=lambda a, r=runner: _cmd_sweep(a, r))

    c = sub.add_parser("checks", help="run the lemma checks")
    c.set_defaults(fn=_cmd_checks)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
