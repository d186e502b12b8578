import io
import json
import subprocess
import sys

import numpy as np
import pytest

from qginibre import cli, serialize
from qginibre.radial import DensityTable


def run(argv):
    buf = io.StringIO()
    code = cli.run(argv, stream=buf)
    return code, buf.getvalue()


def test_macro_table_example():
    code, text = run(["radial", "--mode", "macro", "--n", "1", "--m-hat", "0", "--grid", "0:1.2:121"])
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "r,value"
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert len(rows) == 121
    inside = rows[:, 0] < 1
    assert np.all(rows[inside, 1] == 1 / np.pi)
    assert np.all(rows[rows[:, 0] > 1, 1] == 0)


def test_exact_and_asymptotic_tables_share_grid(out_dir):
    paths = {}
    for mode in ("exact", "asymptotic"):
        paths[mode] = out_dir / f"{mode}.csv"
        assert cli.run(["radial", "--mode", mode, "--n", "3", "--N", "100", "--m", "125", "--out", str(paths[mode])]) == 0
        assert serialize.sidecar_path(paths[mode]).exists()
    ex = np.loadtxt(paths["exact"], delimiter=",", skiprows=1)
    asy = np.loadtxt(paths["asymptotic"], delimiter=",", skiprows=1)
    np.testing.assert_array_equal(ex[:, 0], asy[:, 0])
    bulk = (ex[:, 0] > 0.3 * 325**1.5) & (ex[:, 0] < 0.9 * 325**1.5)
    np.testing.assert_allclose(asy[bulk, 1], ex[bulk, 1], rtol=0.05)
    meta = json.loads(serialize.sidecar_path(paths["exact"]).read_text())
    assert meta["N"] == 100 and meta["m"] == 125.0 and meta["library"] == "qginibre"


def test_sample_scaled_scatter(out_dir):
    out = out_dir / "scatter.csv"
    argv = ["sample", "--n", "3", "--N", "25", "--m", "0", "--draws", "50", "--seed", "42", "--scaled", "--out", str(out)]
    assert cli.run(argv) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape == (50 * 25, 3)
    assert set(data[:, 0].astype(int)) == set(range(50))
    r = np.hypot(data[:, 1], data[:, 2])
    assert np.mean(r <= 1.0) > 0.95  # bulk of the scatter fills the unit disk
    report = json.loads((out_dir / "scatter.report.json").read_text())
    assert report["max_pairing_residual"] < 1e-6
    assert (out_dir / "scatter.hist.csv").exists()
    meta = json.loads((out_dir / "scatter.meta.json").read_text())
    assert meta["seed"] == 42 and meta["scaled"] is True


def test_sample_byte_identical(out_dir):
    texts = []
    for i in range(2):
        out = out_dir / f"s{i}.csv"
        cli.run(["sample", "--n", "2", "--N", "6", "--draws", "20", "--seed", "42", "--out", str(out)])
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]
    code, a = run(["sample", "--n", "2", "--N", "6", "--draws", "20", "--seed", "42", "--format", "json"])
    code, b = run(["sample", "--n", "2", "--N", "6", "--draws", "20", "--seed", "42", "--format", "json", "--workers", "3"])
    da, db = json.loads(a), json.loads(b)
    assert da.pop("meta")["workers"] == 1  # the worker count is recorded, nothing else changes
    db.pop("meta")
    assert da == db


def test_radial_json_roundtrip():
    code, text = run(["radial", "--mode", "scaled", "--n", "2", "--N", "10", "--m-hat", "0.5", "--format", "json"])
    assert code == 0
    doc = json.loads(text)
    table = DensityTable.from_dict(doc["table"])
    assert table.mode == "scaled" and table.params == {"n": 2, "N": 10, "m_hat": 0.5}
    assert DensityTable.from_dict(json.loads(json.dumps(table.to_dict()))) == table


def test_csv_floats_reparse_exactly(out_dir):
    out = out_dir / "w.csv"
    cli.run(["weight", "--n", "3", "--m", "0.5", "--grid", "0.1:4:17", "--out", str(out)])
    header, rows = serialize.read_csv(out)
    assert header == ["r", "weight", "log_weight"]
    from qginibre.correlations import log_weight
    from qginibre.ensemble import EnsembleParams

    lw = log_weight(EnsembleParams(3, 0.5, 1), np.linspace(0.1, 4, 17))
    assert [float(r[2]) for r in rows] == list(lw)


def test_polys_kernel_corr():
    code, text = run(["polys", "--n", "1", "--K", "1"])
    assert code == 0
    assert "coef,2,0,2,0.69314718055994529" in text
    code, text = run(["kernel", "--n", "1", "--N", "1", "--pair", "1j,0"])
    # kappa_1(u, v) = 2 (u - v) / pi for n = 1, m = 0
    row = text.splitlines()[1].split(",")
    assert complex(float(row[4]), float(row[5])) == pytest.approx(2j / np.pi)
    code, text = run(["corr", "--n", "1", "--N", "1", "--point", "0.3+0.7i"])
    assert float(text.splitlines()[1].split(",")[1]) == pytest.approx(4 / np.pi * 0.49 * np.exp(-0.58))


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, text = run(["radial", "--mode", "edge", "--grid=-1:1:5"])
    assert code == 0 and text == ""
    assert (tmp_path / "radial_edge.csv").exists()
    code, text = run(["radial", "--mode", "edge", "--grid=-1:1:5", "--out", "-"])
    assert text.startswith("r,value")


@pytest.mark.parametrize(
    "argv,code",
    [
        (["radial", "--bogus"], 2),
        (["radial", "--n", "0", "--N", "3"], 2),
        (["radial", "--mode", "exact", "--n", "1"], 2),
        (["radial", "--grid", "1:0:3", "--N", "2"], 2),
        (["sample", "--N", "2", "--m", "1", "--seed", "1"], 2),
        (["kernel", "--N", "2", "--pair", "1j"], 2),
        (["corr", "--N", "2", "--point", "1j", "--m", "1", "--m-hat", "1"], 2),
        (["radial", "--mode", "exact", "--N", "3", "--out", "/proc/forbidden/x.csv"], 4),
        (["weight", "--n", "3", "--rel-tol", "1e-18"], 3),
        ([], 2),
    ],
)
def test_exit_codes(argv, code, out_dir):
    assert cli.run(argv, stream=io.StringIO()) == code


def test_verify_subset_deterministic(out_dir):
    outs = []
    for i in range(2):
        out = out_dir / f"v{i}.json"
        assert cli.run(["verify", "--criteria", "1,3", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["passed"] is True and set(doc["criteria"]) == {"1", "3"}


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qginibre", "radial", "--mode", "edge", "--grid", "0:1:3", "--out", "-"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "r,value"
