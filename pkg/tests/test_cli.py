import io
import json

import jsonschema
import pytest

from plustrace.cli import (
    COMMANDS,
    RunConfig,
    expand_cells,
    main,
    parse_range,
    run,
    schema,
    UsageError,
)


def call(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_splus_json(capsys):
    code, out, _ = call(["splus", "--m", "1", "--n", "-3", "--c", "4"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert abs(doc["value"] + 2.8284271247461903) < 1e-12 and doc["err"] < 1e-10
    jsonschema.validate(doc, schema("splus"))


def test_trace_json(capsys):
    code, out, _ = call(["trace", "--m", "1", "--D", "-3", "--d", "1"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["rounded"] == -248 and doc["certified"] is True
    jsonschema.validate(doc, schema("trace"))


def test_uncertified_trace_exits_zero(capsys):
    code, out, _ = call(["trace", "--m", "1", "--D", "-15", "--d", "-3"], capsys)
    assert code == 0 and json.loads(out)["certified"] is False


@pytest.mark.parametrize(
    "argv,name",
    [
        (["weyl", "--m", "2", "--D", "-20", "--d", "5", "--c", "40"], "weyl"),
        (["rect", "--m", "1", "--D", "-3", "--Y", "1/2", "--conjugate", "no"], "rect"),
        (["zeta", "--m", "1", "--n", "-3", "--s", "2", "--c-max", "400"], "zeta"),
        (["zeta", "--m", "1", "--n", "-3", "--s", "0.8", "--c-max", "40"], "zeta"),
        (["recover", "--m", "1", "--D", "-3", "--Y", "0.05"], "recover"),
        (["check-theorem1", "--m", "1", "--D", "-3", "--delta", "1/4"], "check"),
        (["check-theorem2", "--m", "1", "--D", "-4", "--Y", "0.1", "--delta", "1/5"], "check"),
        (["check-theorem51", "--m", "1", "--n", "-3", "--x-max", "400"], "check"),
        (["check-weil", "--m", "1", "--n", "-3", "--c", "400"], "check"),
    ],
)
def test_outputs_validate(argv, name, capsys):
    code, out, _ = call(argv, capsys)
    assert code == 0
    jsonschema.validate(json.loads(out), schema(name))


def test_rect_value(capsys):
    _, out, _ = call(["rect", "--m", "1", "--D", "-3", "--Y", "1/2", "--conjugate", "no"], capsys)
    assert abs(json.loads(out)["value"] + 230.7646) < 1e-3


def test_check_summary(capsys):
    code, out, _ = call(["check-theorem51", "--m", "1", "--n", "-3", "--x-max", "1000", "--delta", "1/5"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["summary"] == {"total": 250, "failures": 0}


def test_out_of_range_y_evaluated_when_not_strict(capsys):
    code, out, _ = call(["check-theorem2", "--m", "3", "--D", "-3", "--Y", "1/10", "--strict", "no"], capsys)
    assert code == 0 and json.loads(out)["reports"][0]["notes"]["in_range"] is False


def test_failed_report_exit_code(tmp_path, capsys):
    # the cache is trusted as long as it passes the load-time Weil check (|value| <= bound + err);
    # the report charges err against the bound, so this record fails the check itself
    cache = tmp_path / "k.csv"
    cache.write_text("k_num,m,n,c,value_decimal,err_decimal\n1,1,-3,4,11.9,0\n")
    code, _, _ = call(["--cache", str(cache), "check-weil", "--m", "1", "--n", "-3", "--c", "4"], capsys)
    assert code == 0
    cache.write_text("k_num,m,n,c,value_decimal,err_decimal\n1,1,-3,4,11.9,0.5\n")
    code, out, _ = call(["--cache", str(cache), "check-weil", "--m", "1", "--n", "-3", "--c", "4"], capsys)
    assert code == 1
    assert json.loads(out)["summary"]["failures"] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["splus", "--m", "1", "--n", "-3", "--c", "5"],
        ["splus", "--m", "2", "--n", "-3", "--c", "4"],
        ["splus", "--m", "x", "--n", "-3", "--c", "4"],
        ["splus", "--m", "1"],
        ["--precision", "32", "trace", "--m", "1", "--D", "-3"],
        ["--precision", "5000", "trace", "--m", "1", "--D", "-3"],
        ["trace", "--m", "1", "--D", "-5"],
        ["trace", "--m", "1", "--D", "-12", "--d", "-4"],
        ["check-theorem2", "--m", "2", "--D", "-3", "--Y", "0.1"],
        ["check-theorem1", "--m", "1", "--D", "-3", "--delta", "1/3"],
        ["zeta", "--m", "1", "--n", "-3", "--s", "0.7", "--c-max", "40"],
        ["bogus"],
        ["scan", "splus", "--m", "1", "--n", "-3", "--c", "4:x"],
        ["scan", "splus", "--m", "1", "--n", "-3", "--c", "4:8:0"],
        ["--output", "xml", "splus", "--m", "1", "--n", "-3", "--c", "4"],
    ],
)
def test_usage_errors(argv, capsys):
    code, _, err = call(argv, capsys)
    assert code == 2
    assert err


def test_precision_env(monkeypatch, capsys):
    monkeypatch.setenv("PLUSTRACE_PRECISION", "256")
    _, out, _ = call(["trace", "--m", "1", "--D", "-7"], capsys)
    assert json.loads(out)["precision_bits"] >= 256
    monkeypatch.setenv("PLUSTRACE_PRECISION", "12")
    code, _, _ = call(["trace", "--m", "1", "--D", "-7"], capsys)
    assert code == 2


def test_options_after_command(capsys):
    code, out, _ = call(["splus", "--m", "1", "--n", "-3", "--c", "4", "--output", "text"], capsys)
    assert code == 0 and out.startswith("k=1/2 m=1 n=-3 c=4 value=")


def test_parse_range():
    assert parse_range("4:20:4") == [4, 8, 12, 16, 20]
    assert parse_range("1,3,5:7") == [1, 3, 5, 6, 7]
    assert parse_range("-3") == [-3]
    assert parse_range("-10:-7") == [-10, -9, -8, -7]
    assert parse_range("-3:-11:4") == [-3, -7, -11]
    for bad in ("1:2:3:4", "1:5:0", "", "1,,2", "1:x"):
        with pytest.raises(UsageError):
            parse_range(bad)


def test_cells_are_ordered():
    cells = expand_cells("splus", {"k": "1/2", "m": "5,1", "n": "-3,-7", "c": "8,4"})
    keys = [(c["m"], c["n"], c["c"]) for c in cells]
    assert keys == sorted(keys) and len(keys) == 8


def test_scan_cardinality_and_schema(capsys):
    code, out, _ = call(["scan", "splus", "--m", "1", "--n", "-3", "--c", "4:2000:4"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 500
    jsonschema.validate(doc, schema("scan"))


def test_scan_checks(capsys):
    argv = ["scan", "check-theorem2", "--m", "1", "--D", "-3:-24", "--d", "all", "--Y", "1/20,1/10", "--delta", "1/4,1/5"]
    code, out, _ = call(argv, capsys)
    doc = json.loads(out)
    jsonschema.validate(doc, schema("scan"))
    assert code == 0 and doc["summary"]["failures"] == 0


def test_scan_discriminant_ranges(capsys):
    # -5, -6 are not discriminants and are skipped; d=all expands the factorizations
    code, out, _ = call(["scan", "trace", "--m", "1", "--D", "-3:-8", "--d", "all"], capsys)
    rows = json.loads(out)["rows"]
    assert code == 0
    assert [(r["D"], r["d"]) for r in rows] == [(-8, 1), (-8, -8), (-7, 1), (-7, -7), (-4, 1), (-4, -4), (-3, 1), (-3, -3)]
    code, _, err = call(["scan", "trace", "--m", "1", "--D", "-3:-8", "--d", "5"], capsys)
    assert code == 2 and "does not divide" in err


def test_scan_deterministic_across_workers_and_cache(tmp_path, capsys):
    argv = ["--output", "csv", "scan", "splus", "--m", "1,5", "--n", "-3,-4", "--c", "4:600:4"]
    _, fresh, _ = call(argv, capsys)
    _, par, _ = call(["--workers", "2"] + argv, capsys)
    cache = str(tmp_path / "k.csv")
    _, first, _ = call(["--cache", cache] + argv, capsys)
    _, resumed, _ = call(["--cache", cache, "--workers", "2"] + argv, capsys)
    assert fresh == par == first == resumed
    assert len(fresh.splitlines()) == 1 + 4 * 150


def test_scan_parallel_cache_written_once(tmp_path, capsys):
    cache = tmp_path / "k.csv"
    argv = ["--cache", str(cache), "--workers", "2", "scan", "splus", "--m", "1", "--n", "-3", "--c", "4:400:4"]
    call(argv, capsys)
    call(argv, capsys)
    assert len(cache.read_text().splitlines()) == 101


def test_run_config_directly():
    buf = io.StringIO()
    cfg = RunConfig("splus", {"k": "1/2", "m": "1", "n": "0", "c": "4"})
    assert run(cfg, buf) == 0
    assert json.loads(buf.getvalue())["value"] > 2.8


def test_every_command_has_a_schema():
    for cmd in list(COMMANDS) + ["scan"]:
        assert schema(cmd)["type"] == "object"


def test_csv_and_text(capsys):
    _, out, _ = call(["--output", "csv", "check-theorem1", "--m", "1", "--D", "-3"], capsys)
    header = out.splitlines()[0].split(",")
    assert header[:4] == ["name", "params.m", "params.D", "params.d"]
    _, out, _ = call(["--output", "text", "check-theorem1", "--m", "1", "--D", "-3"], capsys)
    assert out.splitlines()[-1] == "total=1 failures=0"
