#!/usr/bin/env python3
"""Render harness CSVs into figures.

Read-only consumer of the experiment outputs: nothing is recomputed, only
recorded columns are drawn.

    plots/render.py --kind {scaling,stability,instability,checks} \
        --in <csv> [--in <csv> ...] --out <file.svg>

Exits nonzero with a message when an input does not carry the expected
schema (``schema_version`` column plus the kind's required columns).
Empty inputs (header only) render a "no data" annotation and exit 0.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SUPPORTED_SCHEMA = "1"

REQUIRED_COLUMNS = {
    "scaling": {"schema_version", "problem", "grid_index", "seed_index",
                "status", "ratio", "bound", "event1", "event2"},
    "stability": {"schema_version", "K", "N", "L", "noise_kind", "tau",
                  "tau_frac", "err", "err_over_tau"},
    "instability": {"schema_version", "problem", "t", "tau", "status",
                    "dist_xtilde", "dist_xhat", "dist_lower_bound"},
    "checks": {"schema_version", "problem", "status", "event1", "event2"},
}


class SchemaError(RuntimeError):
    pass


def read_rows(path: Path, kind: str):
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, not a harness CSV")
        missing = REQUIRED_COLUMNS[kind] - set(reader.fieldnames)
        if missing:
            raise SchemaError(f"{path}: missing columns for kind {kind!r}: "
                              f"{sorted(missing)}")
        rows = list(reader)
    bad = {r["schema_version"] for r in rows} - {SUPPORTED_SCHEMA}
    if bad:
        raise SchemaError(f"{path}: unsupported schema_version values {sorted(bad)}")
    return rows


def _f(row, key):
    return float(row[key])


def _no_data(ax, title):
    ax.set_title(title)
    ax.text(0.5, 0.5, "no data", ha="center", va="center",
            transform=ax.transAxes, fontsize=14, color="gray")
    ax.set_xticks([])
    ax.set_yticks([])


def draw_scaling(ax, rows, label):
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        _no_data(ax, f"scaling: {label}")
        return
    for problem, marker in (("deconv", "o"), ("completion", "s")):
        sub = [r for r in ok if r["problem"] == problem]
        if not sub:
            continue
        if problem == "deconv":
            xs = np.array([math.sqrt(_f(r, "L") / (_f(r, "K") * _f(r, "N"))) for r in sub])
        else:
            xs = np.array([math.sqrt(_f(r, "m") / (_f(r, "r") * _f(r, "n1") * _f(r, "n2")))
                           for r in sub])
        ys = np.array([_f(r, "ratio") for r in sub])
        ax.scatter(xs, ys, s=12, alpha=0.5, marker=marker, label=f"{problem} ratio")
        # median per distinct abscissa, and the least-squares line through them
        med_x, med_y = [], []
        for x in sorted(set(xs)):
            med_x.append(x)
            med_y.append(np.median(ys[xs == x]))
        if len(med_x) >= 2:
            slope, intercept = np.polyfit(np.log(med_x), np.log(med_y), 1)
            grid = np.linspace(min(med_x), max(med_x), 50)
            ax.plot(grid, np.exp(intercept) * grid ** slope, "--",
                    label=f"{problem} fit: slope {slope:.3f}")
        ax.plot(med_x, med_y, "k+", ms=10)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("dimension factor")
    ax.set_ylabel("certificate ratio ||A(Z)|| / ||Z||_F")
    ax.set_title(f"conic ratio scaling: {label}")
    ax.legend(fontsize=7)


def draw_stability(ax, rows, label):
    if not rows:
        _no_data(ax, f"stability: {label}")
        return
    K = _f(rows[0], "K")
    N = _f(rows[0], "N")
    L = _f(rows[0], "L")
    for kind, marker in (("certificate", "o"), ("random", "s")):
        sub = sorted((r for r in rows if r["noise_kind"] == kind),
                     key=lambda r: _f(r, "tau"))
        if not sub:
            continue
        taus = np.array([_f(r, "tau") for r in sub])
        errs = np.array([_f(r, "err") for r in sub])
        ax.plot(taus, errs, marker=marker, ms=4, label=f"{kind} noise")
    taus_all = np.array(sorted({_f(r, "tau") for r in rows}))
    ref = np.sqrt(K * N / L) * taus_all
    ax.plot(taus_all, ref, ":", color="gray", label="sqrt(KN/L) * tau reference")
    if "tau0" in rows[0]:
        ax.axvline(_f(rows[0], "tau0"), ls="--", color="red", lw=0.8, label="tau0 knee")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("noise level tau")
    ax.set_ylabel("reconstruction error")
    ax.set_title(f"error vs noise: {label}")
    ax.legend(fontsize=7)


def draw_instability(ax, rows, label):
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        _no_data(ax, f"instability: {label}")
        return
    ok = sorted(ok, key=lambda r: _f(r, "tau"))
    taus = np.array([_f(r, "tau") for r in ok])
    ax.plot(taus, [_f(r, "dist_xtilde") for r in ok], "o-", ms=4,
            label="alternative solution distance")
    ax.plot(taus, [_f(r, "dist_xhat") for r in ok], "s-", ms=4,
            label="solver minimizer distance")
    ax.plot(taus, [_f(r, "dist_lower_bound") for r in ok], ":", color="gray",
            label="certified lower bound")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("noise level tau")
    ax.set_ylabel("Frobenius distance to truth")
    ax.set_title(f"instability: {label}")
    ax.legend(fontsize=7)


def draw_checks(ax, rows, label):
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        _no_data(ax, f"event rates: {label}")
        return
    groups = sorted({r["problem"] for r in ok})
    names, rates = [], []
    for g in groups:
        sub = [r for r in ok if r["problem"] == g]
        for flag in ("event1", "event2"):
            names.append(f"{g}\n{flag}")
            rates.append(np.mean([r[flag] == "true" for r in sub]))
    ax.bar(names, rates, color="tab:blue", alpha=0.8)
    ax.axhline(1.0, color="gray", lw=0.8, ls=":")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("pass rate")
    ax.set_title(f"event pass rates: {label}")


DRAWERS = {
    "scaling": draw_scaling,
    "stability": draw_stability,
    "instability": draw_instability,
    "checks": draw_checks,
}


def render(kind: str, inputs, out_path: Path) -> None:
    panels = []
    for path in inputs:
        panels.append((Path(path).stem, read_rows(Path(path), kind)))
    fig, axes = plt.subplots(1, len(panels), figsize=(6 * len(panels), 4.5),
                             squeeze=False)
    for ax, (label, rows) in zip(axes[0], panels):
        DRAWERS[kind](ax, rows, label)
    fig.tight_layout()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kind", required=True, choices=sorted(DRAWERS))
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="input CSV (repeat for panels)")
    parser.add_argument("--out", required=True, help="output figure (SVG default)")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.inputs, Path(args.out))
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
