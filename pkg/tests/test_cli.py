"""CLI: schemas, worked examples, determinism, exit codes."""

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from divexp import EULER_GAMMA, harmonic_real
from divexp.cli import COLUMNS, main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_exact_uniform_large_n(capsys):
    code, out, _ = run_cli(
        ["exact", "--model", "uniform", "--sym-prior", "a=1,N=1000000", "--no-header-timestamp"],
        capsys,
    )
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 1
    row = rows[0]
    assert row["command"] == "exact"
    assert row["model_kind"] == "uniform"
    assert row["N"] == "1000000"
    val = float(row["value"])
    expected = math.log(10 ** 6) - float(harmonic_real(10 ** 6.0)) + 1.0
    assert val == pytest.approx(expected, abs=1e-13)
    assert val == pytest.approx(0.4227838, abs=1e-6)


def test_exact_partition_with_factors(capsys):
    code, out, _ = run_cli(
        [
            "exact", "--model", '{"kind": "partition", "blocks": [[0, 1], [2, 3]]}',
            "--sym-prior", "a=1,N=4", "--no-header-timestamp",
        ],
        capsys,
    )
    assert code == 0
    row = parse_csv(out)[0]
    assert float(row["value"]) == pytest.approx(math.log(2) - 0.5, rel=1e-12)


def test_pointwise_partition_example(capsys):
    code, out, _ = run_cli(
        [
            "pointwise", "--model", '{"kind": "partition", "blocks": [[0], [1, 2]]}',
            "--p", "[0.5, 0.3, 0.2]", "--format", "json", "--no-header-timestamp",
        ],
        capsys,
    )
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["value"] == pytest.approx(0.010067756775344, abs=1e-12)
    assert rows[0]["q_star"] == pytest.approx([0.5, 0.25, 0.25], abs=1e-14)


def test_mc_independence_example(capsys):
    code, out, _ = run_cli(
        [
            "mc", "--model", "independence", "--factors", "2,2", "--sym-prior", "a=1",
            "--n", "100000", "--seed", "7", "--no-header-timestamp",
        ],
        capsys,
    )
    assert code == 0
    row = parse_csv(out)[0]
    est, se = float(row["value"]), float(row["std_error"])
    assert abs(est - 1 / 12) <= 3 * se
    assert row["n_samples"] == "100000"
    assert row["seed"] == "7"


def test_sweep_grid_shape(capsys):
    code, out, _ = run_cli(
        [
            "sweep", "--family", "upsilon1", "--N", "4:2:40", "--a", "0.2,0.5,1,2,5",
            "--n", "300", "--seed", "5", "--no-header-timestamp",
        ],
        capsys,
    )
    assert code == 0
    rows = parse_csv(out)
    data = [r for r in rows if r["quantity"] == "mc_union_divergence"]
    asym = [r for r in rows if r["quantity"] == "asymptote"]
    assert len(data) == 19 * 5
    assert len(asym) == 5
    assert sorted({r["N"] for r in data}, key=int) == [str(n) for n in range(4, 41, 2)]
    # asymptote rows carry h(a) - log a - gamma
    for r in asym:
        a = float(r["a_or_alpha"].removeprefix("a="))
        want = float(harmonic_real(a)) - math.log(a) - EULER_GAMMA
        assert float(r["value"]) == pytest.approx(want, rel=1e-12)


def test_field_rows(capsys):
    code, out, _ = run_cli(
        [
            "field", "--model", '{"kind": "partition", "blocks": [[0, 1], [2]]}',
            "--resolution", "10", "--no-header-timestamp",
        ],
        capsys,
    )
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 66  # (R+1)(R+2)/2 grid nodes
    for r in rows:
        x = [float(r["x1"]), float(r["x2"]), float(r["x3"])]
        assert sum(x) == pytest.approx(1.0, abs=1e-12)
        if abs(x[0] - x[1]) < 1e-12:
            assert abs(float(r["value"])) <= 1e-14


def test_csv_byte_identical_without_timestamp(capsys):
    args = [
        "mc", "--model", "uniform", "--sym-prior", "a=1,N=8",
        "--n", "2000", "--seed", "11", "--no-header-timestamp",
    ]
    _, out1, _ = run_cli(args, capsys)
    _, out2, _ = run_cli(args, capsys)
    assert out1 == out2
    # and the wall-time column is blanked in this mode
    assert parse_csv(out1)[0]["wall_time_ms"] == ""


def test_csv_columns_fixed_order(capsys):
    _, out, _ = run_cli(
        ["exact", "--model", "uniform", "--sym-prior", "a=1,N=4", "--no-header-timestamp"],
        capsys,
    )
    header = out.splitlines()[0].split(",")
    assert header == COLUMNS


def test_model_round_trip_through_cli_json(tmp_path, capsys):
    model = {
        "kind": "decomposable",
        "facets": [[1, 2], [2, 3]],
        "edges": [[0, 1, [2]]],
    }
    f = tmp_path / "model.json"
    f.write_text(json.dumps(model))
    code, out, _ = run_cli(
        [
            "exact", "--model-file", str(f), "--factors", "2,2,2",
            "--sym-prior", "a=1", "--no-header-timestamp",
        ],
        capsys,
    )
    assert code == 0
    row = parse_csv(out)[0]
    assert row["model_kind"] == "decomposable"
    assert row["factors"] == "2x2x2"


def test_prior_file(tmp_path, capsys):
    f = tmp_path / "prior.json"
    f.write_text(json.dumps({"alpha": [1.0, 2.0, 3.0]}))
    code, out, _ = run_cli(
        ["exact", "--model", "uniform", "--prior-file", str(f), "--no-header-timestamp"],
        capsys,
    )
    assert code == 0
    row = parse_csv(out)[0]
    assert row["a_or_alpha"].startswith("sha1:")
    want = math.log(3) - float(harmonic_real(6.0)) + (
        1 * float(harmonic_real(1.0)) + 2 * float(harmonic_real(2.0)) + 3 * float(harmonic_real(3.0))
    ) / 6
    assert float(row["value"]) == pytest.approx(want, rel=1e-12)


def test_exit_code_validation_error(capsys):
    code, _, err = run_cli(
        ["exact", "--model", '{"kind": "nope"}', "--sym-prior", "a=1,N=4"], capsys
    )
    assert code == 1
    assert "kind" in err


def test_exit_code_malformed_json(capsys):
    code, _, err = run_cli(
        ["exact", "--model", '{"kind": ', "--sym-prior", "a=1,N=4"], capsys
    )
    assert code == 1
    assert "line" in err


def test_exit_code_numeric_domain(capsys):
    code, _, err = run_cli(
        [
            "exact", "--model", '{"kind": "fixed_point", "q": [1.0, 0.0]}',
            "--sym-prior", "a=1,N=2",
        ],
        capsys,
    )
    assert code == 2
    assert "infinite" in err


def test_missing_prior_is_validation_error(capsys):
    code, _, err = run_cli(["exact", "--model", "uniform"], capsys)
    assert code == 1


def test_selftest_single_check(capsys):
    code, out, _ = run_cli(
        ["selftest", "--only", "bipartition_counts", "--no-header-timestamp"], capsys
    )
    assert code == 0
    assert "PASS bipartition_counts" in out


def test_out_file(tmp_path, capsys):
    dest = tmp_path / "rows.csv"
    code, out, _ = run_cli(
        [
            "exact", "--model", "uniform", "--sym-prior", "a=2,N=9",
            "--out", str(dest), "--no-header-timestamp",
        ],
        capsys,
    )
    assert code == 0
    assert out == ""
    rows = parse_csv(dest.read_text())
    assert rows[0]["a_or_alpha"] == "a=2"


def test_module_entrypoint_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "divexp.cli", "exact", "--model", "uniform",
         "--sym-prior", "a=1,N=4", "--no-header-timestamp"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "expected_div_uniform" in proc.stdout
