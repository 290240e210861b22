"""End-to-end tests for the guesslab command line interface.

Each subcommand is driven through ``dispatch`` with temporary JSON source
configs, and every CSV/JSON cell is checked against a direct library call.
Cells carry 17 significant digits, so float comparisons are exact
round-trips, not approximations.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import shutil
import subprocess

import pytest

from guesslab.cli import dispatch
from guesslab.entropy import conditional_renyi_arimoto, renyi_entropy
from guesslab.guesswork import (
    DEFAULT_MAX_TYPE_TUPLES,
    guesswork_distribution,
    moment_bounds,
)
from guesslab.ldp import RateFunction, empirical_exponent, scgf_derivative, scgf_limit
from guesslab.model import Distribution, load_source_file
from guesslab.montecarlo import estimate_log_guesswork_rate, estimate_moment
from guesslab.parallel import (
    UserEnsemble,
    kmin_distribution,
    rate_parallel,
    scgf_parallel,
    scgf_parallel_iid,
)

LN2 = math.log(2.0)

BSC_CONFIG = {
    "x_symbols": ["0", "1"],
    "y_symbols": ["0", "1"],
    "joint": [[0.45, 0.05], [0.05, 0.45]],
}
UNIFORM_CONFIG = {
    "x_symbols": ["0", "1"],
    "y_symbols": ["y"],
    "joint": [[0.5], [0.5]],
}


@pytest.fixture()
def bsc_path(tmp_path):
    path = tmp_path / "bsc.json"
    path.write_text(json.dumps(BSC_CONFIG))
    return str(path)


@pytest.fixture()
def uniform_path(tmp_path):
    path = tmp_path / "uniform.json"
    path.write_text(json.dumps(UNIFORM_CONFIG))
    return str(path)


def run_cli(capsys, argv):
    code = dispatch(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def csv_rows(text):
    rows = list(csv.reader(text.splitlines()))
    return rows[0], rows[1:]


def file_digest(path):
    with open(path, "rb") as fh:
        return hashlib.blake2b(fh.read(), digest_size=8).hexdigest()


# ---------------------------------------------------------------------------
# entropy
# ---------------------------------------------------------------------------


def test_entropy_csv_and_stderr_manifest(capsys, bsc_path):
    code, out, err = run_cli(
        capsys, ["entropy", "--source", bsc_path, "--orders", "0.5,1,2"]
    )
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["order", "conditional", "unconditional"]
    assert len(rows) == 3

    source = load_source_file(bsc_path)
    marginal = Distribution(source.x_alphabet, source.joint.sum(axis=1))
    for row, order in zip(rows, (0.5, 1.0, 2.0)):
        assert float(row[0]) == order
        assert float(row[1]) == conditional_renyi_arimoto(source, order)
        assert float(row[2]) == renyi_entropy(marginal, order)

    manifest = json.loads(err)
    assert manifest["subcommand"] == "entropy"
    assert manifest["outputs"] == []
    assert manifest["sources"] == {bsc_path: file_digest(bsc_path)}
    params = manifest["parameters"]
    assert params["orders"] == [0.5, 1.0, 2.0]
    assert params["bits"] is False
    assert params["source"] == bsc_path
    assert "handler" not in params
    assert "out" not in params  # None-valued flags are dropped


def test_entropy_bits_divides_by_ln2(capsys, bsc_path):
    code, out, _ = run_cli(
        capsys, ["entropy", "--source", bsc_path, "--orders", "2", "--bits"]
    )
    assert code == 0
    _, rows = csv_rows(out)
    source = load_source_file(bsc_path)
    assert float(rows[0][1]) == conditional_renyi_arimoto(source, 2.0) / LN2


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def test_moments_table_and_bound_cells(capsys, bsc_path):
    code, out, _ = run_cli(
        capsys,
        ["moments", "--source", bsc_path, "--n", "4", "--alphas", "-0.5,1,2"],
    )
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["n", "alpha", "exact", "lower", "upper", "scgf_empirical"]
    assert len(rows) == 3

    source = load_source_file(bsc_path)
    dist = guesswork_distribution(source, 4)
    for row, alpha in zip(rows, (-0.5, 1.0, 2.0)):
        assert int(row[0]) == 4
        assert float(row[1]) == alpha
        assert float(row[2]) == dist.moment(alpha)
        assert float(row[5]) == dist.scgf_empirical(alpha)

    # bounds are emitted only on -1 < alpha < 0; elsewhere the cells are blank
    lower, upper = moment_bounds(source, 4, -0.5)
    assert float(rows[0][3]) == lower
    assert float(rows[0][4]) == upper
    assert lower <= float(rows[0][2]) <= upper
    for row in rows[1:]:
        assert row[3] == ""
        assert row[4] == ""


def test_budget_exceeded_reports_json_error(capsys, bsc_path):
    code, out, err = run_cli(
        capsys, ["moments", "--source", bsc_path, "--n", "999", "--alphas", "1"]
    )
    assert code == 1
    assert out == ""
    payload = json.loads(err)
    assert payload["error"] == "budget_exceeded"
    assert payload["cap"] == DEFAULT_MAX_TYPE_TUPLES
    assert isinstance(payload["required"], int)
    assert payload["required"] > payload["cap"]
    assert "message" in payload


# ---------------------------------------------------------------------------
# dist
# ---------------------------------------------------------------------------


def test_dist_uniform_single_block(capsys, uniform_path):
    code, out, _ = run_cli(capsys, ["dist", "--source", uniform_path, "--n", "3"])
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["y_type", "y_mass", "start", "count", "level"]
    assert rows == [["y:3", "1", "1", "8", "0.125"]]


def test_dist_rows_match_library_blocks(capsys, bsc_path):
    code, out, _ = run_cli(capsys, ["dist", "--source", bsc_path, "--n", "1"])
    assert code == 0
    _, rows = csv_rows(out)
    assert len(rows) == 4
    assert {row[0] for row in rows} == {"0:1;1:0", "0:0;1:1"}

    dist = guesswork_distribution(load_source_file(bsc_path), 1)
    for row, (start, count, level, y_mass) in zip(rows, dist.blocks):
        assert float(row[1]) == y_mass
        assert int(row[2]) == start
        assert int(row[3]) == count
        assert float(row[4]) == level


# ---------------------------------------------------------------------------
# scgf
# ---------------------------------------------------------------------------


def test_scgf_derivative_blank_on_plateau(capsys, bsc_path):
    code, out, _ = run_cli(
        capsys, ["scgf", "--source", bsc_path, "--alphas", "-2,-1,0.5"]
    )
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["alpha", "scgf_limit", "derivative"]

    source = load_source_file(bsc_path)
    for row, alpha in zip(rows, (-2.0, -1.0, 0.5)):
        assert float(row[0]) == alpha
        assert float(row[1]) == scgf_limit(source, alpha)
    assert rows[0][2] == ""
    assert rows[1][2] == ""
    assert float(rows[2][2]) == scgf_derivative(source, 0.5)


def test_comma_list_starting_with_negative_number_parses(capsys, bsc_path):
    # a leading negative element must not be mistaken for an option flag
    code, out, _ = run_cli(
        capsys, ["scgf", "--source", bsc_path, "--alphas", "-0.9,-0.5,-0.1"]
    )
    assert code == 0
    _, rows = csv_rows(out)
    assert [float(row[0]) for row in rows] == [-0.9, -0.5, -0.1]


# ---------------------------------------------------------------------------
# rate
# ---------------------------------------------------------------------------


def test_rate_grid_row_count_and_inf_sentinel(capsys, uniform_path):
    code, out, _ = run_cli(
        capsys, ["rate", "--source", uniform_path, "--xgrid", "0:0.7:0.01"]
    )
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["x", "rate"]
    assert len(rows) == 71

    rate = RateFunction.from_source(load_source_file(uniform_path))
    inf_cells = 0
    for row in rows:
        x = float(row[0])
        value = rate(x)
        if math.isinf(value):
            assert row[1] == "inf"
            inf_cells += 1
        else:
            assert float(row[1]) == value
    # only the final grid point (0.7 + fp noise) exceeds log 2
    assert inf_cells == 1
    assert rows[-1][1] == "inf"


def test_rate_bits_scaling(capsys, uniform_path):
    code, out, _ = run_cli(
        capsys, ["rate", "--source", uniform_path, "--xgrid", "0:0:0.1", "--bits"]
    )
    assert code == 0
    _, rows = csv_rows(out)
    assert rows == [["0", "1"]]  # rate(0) = ln 2 exactly, i.e. one bit


# ---------------------------------------------------------------------------
# ldp
# ---------------------------------------------------------------------------


def test_ldp_rows_match_library(capsys, uniform_path):
    code, out, _ = run_cli(
        capsys,
        ["ldp", "--source", uniform_path, "--x", "0.3", "--eps", "0.05", "--nmax", "4"],
    )
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["n", "x", "eps", "empirical_exponent", "rate_function", "gap"]
    assert [int(row[0]) for row in rows] == [1, 2, 3, 4]

    source = load_source_file(uniform_path)
    limit = RateFunction.from_source(source)(0.3)
    saw_empty_window = False
    for row, n in zip(rows, range(1, 5)):
        assert float(row[1]) == 0.3
        assert float(row[2]) == 0.05
        assert float(row[4]) == limit
        empirical = empirical_exponent(source, 0.3, 0.05, n)
        if math.isinf(empirical):
            assert row[3] == ("inf" if empirical > 0 else "-inf")
            assert row[5] == ""  # gap is blank when either side is infinite
            saw_empty_window = True
        else:
            assert float(row[3]) == empirical
            assert float(row[5]) == empirical - limit
    # at small n the target window contains no achievable rank
    assert saw_empty_window


# ---------------------------------------------------------------------------
# parallel
# ---------------------------------------------------------------------------


def test_parallel_long_format_table(capsys, bsc_path):
    code, out, _ = run_cli(
        capsys,
        [
            "parallel",
            "--sources",
            f"{bsc_path},{bsc_path}",
            "--k",
            "1",
            "--n",
            "2",
            "--alphas",
            "1",
            "--xgrid",
            "0:0.6:0.3",
        ],
    )
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["quantity", "n", "alpha", "x", "value"]
    assert [row[0] for row in rows] == [
        "kmin_moment",
        "kmin_scgf_empirical",
        "scgf_parallel",
        "rate_parallel",
        "rate_parallel",
        "rate_parallel",
    ]

    source = load_source_file(bsc_path)
    ensemble = UserEnsemble((source, source), 1)
    dist = kmin_distribution(ensemble, 2)
    assert int(rows[0][1]) == 2
    assert float(rows[0][2]) == 1.0
    assert rows[0][3] == ""
    assert float(rows[0][4]) == dist.moment(1.0)
    assert float(rows[1][4]) == dist.scgf_empirical(1.0)

    assert rows[2][1] == ""
    assert float(rows[2][4]) == scgf_parallel(ensemble, 1.0, "permutations")

    for row, x in zip(rows[3:], (0.0, 0.3, 0.6)):
        assert row[1] == "" and row[2] == ""
        assert float(row[3]) == x
        assert float(row[4]) == rate_parallel(ensemble, x, "permutations")


def test_parallel_iid_uses_closed_form(capsys, bsc_path):
    code, out, _ = run_cli(
        capsys,
        ["parallel", "--sources", bsc_path, "--k", "1", "--iid", "--m", "2",
         "--alphas", "1"],
    )
    assert code == 0
    _, rows = csv_rows(out)
    assert [row[0] for row in rows] == ["scgf_parallel"]
    source = load_source_file(bsc_path)
    assert float(rows[0][4]) == scgf_parallel_iid(source, 1, 2, 1.0)
    assert float(rows[0][4]) == pytest.approx(0.41305297631942955, abs=1e-12)


def test_parallel_flag_misuse_is_an_ensemble_error(capsys, bsc_path):
    code, _, err = run_cli(
        capsys,
        ["parallel", "--sources", f"{bsc_path},{bsc_path}", "--k", "1", "--iid",
         "--m", "2", "--alphas", "1"],
    )
    assert code == 1
    assert json.loads(err)["error"] == "ensemble_error"

    code, _, err = run_cli(
        capsys,
        ["parallel", "--sources", bsc_path, "--k", "1", "--m", "2", "--alphas", "1"],
    )
    assert code == 1
    assert json.loads(err)["error"] == "ensemble_error"

    code, _, err = run_cli(
        capsys,
        ["parallel", "--sources", f"{bsc_path},{bsc_path}", "--k", "3",
         "--alphas", "1"],
    )
    assert code == 1
    assert json.loads(err)["error"] == "ensemble_error"


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def test_sample_log_rate_json_is_reproducible(capsys, uniform_path):
    argv = ["sample", "--source", uniform_path, "--n", "8", "--samples", "200",
            "--seed", "1"]
    code, out, err = run_cli(capsys, argv)
    assert code == 0
    assert err == ""
    payload = json.loads(out)
    assert payload["statistic"] == "log_rate"
    assert payload["n"] == 8
    assert payload["samples"] == 200
    assert payload["seed"] == 1
    assert "alpha" not in payload
    assert payload["manifest"]["subcommand"] == "sample"
    assert payload["manifest"]["sources"] == {uniform_path: file_digest(uniform_path)}

    report = estimate_log_guesswork_rate(load_source_file(uniform_path), 8, 200, 1)
    assert payload["estimate"] == report.estimate
    assert payload["std_error"] == report.std_error

    code2, out2, _ = run_cli(capsys, argv)
    assert code2 == 0
    assert out2 == out


def test_sample_moment_includes_alpha(capsys, uniform_path):
    code, out, _ = run_cli(
        capsys,
        ["sample", "--source", uniform_path, "--n", "4", "--alpha", "1",
         "--samples", "150", "--seed", "9"],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["statistic"] == "moment"
    assert payload["alpha"] == 1.0
    report = estimate_moment(load_source_file(uniform_path), 4, 1.0, 150, 9)
    assert payload["estimate"] == report.estimate


def test_sample_out_writes_file(capsys, tmp_path, uniform_path):
    out_path = tmp_path / "report.json"
    code, out, err = run_cli(
        capsys,
        ["sample", "--source", uniform_path, "--n", "4", "--samples", "150",
         "--seed", "9", "--out", str(out_path)],
    )
    assert code == 0
    assert out == ""
    payload = json.loads(out_path.read_text())
    assert payload["statistic"] == "log_rate"
    assert payload["seed"] == 9


def test_sample_rejects_bad_parameters(capsys, uniform_path):
    code, _, err = run_cli(
        capsys,
        ["sample", "--source", uniform_path, "--n", "4", "--samples", "50",
         "--seed", "1"],
    )
    assert code == 1
    assert json.loads(err)["error"] == "sample_error"


# ---------------------------------------------------------------------------
# output files, errors, exit codes
# ---------------------------------------------------------------------------


def test_out_writes_csv_and_sibling_manifest(capsys, tmp_path, bsc_path):
    out_path = tmp_path / "entropy.csv"
    code, out, err = run_cli(
        capsys,
        ["entropy", "--source", bsc_path, "--orders", "1", "--out", str(out_path)],
    )
    assert code == 0
    assert out == ""
    assert err == ""

    header, rows = csv_rows(out_path.read_text())
    assert header == ["order", "conditional", "unconditional"]
    assert len(rows) == 1

    manifest = json.loads((tmp_path / "entropy.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "entropy"
    assert manifest["outputs"] == [str(out_path)]
    assert manifest["sources"][bsc_path] == file_digest(bsc_path)
    assert manifest["parameters"]["out"] == str(out_path)


def test_missing_source_file_is_io_error(capsys, tmp_path):
    code, _, err = run_cli(
        capsys,
        ["entropy", "--source", str(tmp_path / "nope.json"), "--orders", "1"],
    )
    assert code == 1
    assert json.loads(err)["error"] == "io_error"


def test_malformed_config_is_config_error(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run_cli(capsys, ["entropy", "--source", str(path), "--orders", "1"])
    assert code == 1
    assert json.loads(err)["error"] == "config_error"

    path.write_text(json.dumps({"x_symbols": ["0"], "joint": [[1.0]]}))
    code, _, err = run_cli(capsys, ["entropy", "--source", str(path), "--orders", "1"])
    assert code == 1
    assert json.loads(err)["error"] == "config_error"


def test_invalid_joint_is_validation_error(capsys, tmp_path):
    path = tmp_path / "short_mass.json"
    config = {"x_symbols": ["0", "1"], "y_symbols": ["y"], "joint": [[0.4], [0.4]]}
    path.write_text(json.dumps(config))
    code, _, err = run_cli(capsys, ["entropy", "--source", str(path), "--orders", "1"])
    assert code == 1
    assert json.loads(err)["error"] == "validation_error"


def test_usage_errors_exit_2(capsys, bsc_path):
    assert run_cli(capsys, ["no-such-subcommand"])[0] == 2
    assert run_cli(capsys, [])[0] == 2
    assert run_cli(capsys, ["entropy", "--source", bsc_path])[0] == 2
    assert run_cli(
        capsys, ["entropy", "--source", bsc_path, "--orders", "a,b"]
    )[0] == 2
    assert run_cli(
        capsys, ["rate", "--source", bsc_path, "--xgrid", "1:0:-1"]
    )[0] == 2


def test_console_script_entry_point(bsc_path):
    exe = shutil.which("guesslab")
    if exe is None:
        pytest.skip("guesslab console script is not on PATH")
    proc = subprocess.run(
        [exe, "entropy", "--source", bsc_path, "--orders", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "order,conditional,unconditional"
