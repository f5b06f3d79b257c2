"""Secondary-component tests: drive the renderer on real harness outputs.

The primary package is touched only through its public CLI and the CSV
files it writes, which is the interface contract between the components.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

RENDER = Path(__file__).resolve().parents[1] / "render.py"


def _run(*args):
    return subprocess.run([sys.executable, *map(str, args)],
                          capture_output=True, text=True, timeout=600)


@pytest.fixture(scope="module")
def harness_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweeps")
    cfg = out / "cfg.json"
    cfg.write_text(json.dumps({
        "n_seeds": 2,
        "deconv_grid": [[9, 72, 18], [12, 96, 24]],
        "completion_grid": [[40, 40, 2, 40]],
        "t_grid": [0.5, 1.0],
        "stability_dims": [6, 6, 90],
        "tau_fractions": [1e-3, 0.1, 0.3, 1.0],
        "cone_samples": 40,
        "solver_max_iters": 3000,
    }))
    for cmd in ("sweep-scaling", "sweep-instability", "sweep-stability"):
        res = _run("-m", "conekit.cli", "--config", cfg, "--out", out, cmd)
        assert res.returncode == 0, res.stderr
    return out


def _assert_svg(path: Path):
    assert path.exists() and path.stat().st_size > 0
    head = path.read_text()[:500]
    assert "<svg" in head


@pytest.mark.parametrize("kind,csv_name", [
    ("scaling", "scaling.csv"),
    ("stability", "stability.csv"),
    ("instability", "instability.csv"),
    ("checks", "scaling.csv"),  # event-pass-rate bars read the sweep CSV
])
def test_render_each_kind(harness_outputs, tmp_path, kind, csv_name):
    out = tmp_path / f"{kind}.svg"
    res = _run(RENDER, "--kind", kind, "--in", harness_outputs / csv_name,
               "--out", out)
    assert res.returncode == 0, res.stderr
    _assert_svg(out)


def test_render_side_by_side_panels(harness_outputs, tmp_path):
    out = tmp_path / "panels.svg"
    res = _run(RENDER, "--kind", "scaling",
               "--in", harness_outputs / "scaling.csv",
               "--in", harness_outputs / "scaling.csv",
               "--out", out)
    assert res.returncode == 0, res.stderr
    _assert_svg(out)


def test_render_empty_csv_is_annotated(harness_outputs, tmp_path):
    header = (harness_outputs / "scaling.csv").read_text().splitlines()[0]
    empty = tmp_path / "empty.csv"
    empty.write_text(header + "\n")
    out = tmp_path / "empty.svg"
    res = _run(RENDER, "--kind", "scaling", "--in", empty, "--out", out)
    assert res.returncode == 0, res.stderr
    _assert_svg(out)
    assert "no data" in out.read_text()


def test_render_schema_mismatch_exits_nonzero(harness_outputs, tmp_path):
    res = _run(RENDER, "--kind", "stability",
               "--in", harness_outputs / "scaling.csv",
               "--out", tmp_path / "x.svg")
    assert res.returncode != 0
    assert "missing columns" in res.stderr

    bad = tmp_path / "bad_version.csv"
    lines = (harness_outputs / "scaling.csv").read_text().splitlines()
    bad.write_text("\n".join([lines[0]] + [line.replace("1,", "99,", 1)
                                           for line in lines[1:2]]) + "\n")
    res2 = _run(RENDER, "--kind", "scaling", "--in", bad, "--out", tmp_path / "y.svg")
    assert res2.returncode != 0
    assert "schema_version" in res2.stderr
