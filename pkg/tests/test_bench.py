import io
import json

import pytest

from accproj.bench import (BLOCK_SIZES, COLUMNS, REFERENCE, TOLERANCES, BenchTable, build_cases,
                           emit_report, read_csv_rows, run_table, write_csv_rows)


@pytest.fixture(scope="module")
def t4():
    return run_table("t4")


def test_reference_values():
    assert REFERENCE["t2"][50] == 27
    assert REFERENCE["t4"][50] == 7
    assert REFERENCE["t1"][1e-5] == REFERENCE["t2"][20] == 1020
    assert REFERENCE["t3"][20] == 134
    assert REFERENCE["t4"][20] == 42


def test_reference_tables_decrease():
    for name in ("t2", "t3", "t4"):
        counts = [REFERENCE[name][m] for m in BLOCK_SIZES]
        assert counts == sorted(counts, reverse=True)
    assert [REFERENCE["t1"][t] for t in TOLERANCES] == sorted(REFERENCE["t1"].values())


def test_grid_shapes():
    assert len(build_cases("t2")) == 8
    assert len(build_cases("t5")) == 14
    assert len(build_cases("t4", overlaps=(0.0, 0.5), windows=(3, 5, 8))) == 48
    # windows only multiply the msap2 rows
    assert len(build_cases("t3", windows=(3, 5, 8))) == 8
    with pytest.raises(ValueError):
        build_cases("t9")


def test_rows_sorted_canonically(t4):
    keys = [r.case.sort_key() for r in t4.rows]
    assert keys == sorted(keys)


def test_t4_strictly_decreasing(t4):
    counts = [t4.iterations("msap2")[m] for m in BLOCK_SIZES]
    assert all(x > y for x, y in zip(counts, counts[1:]))


def test_parallel_matches_serial():
    serial = run_table("t3", jobs=1)
    parallel = run_table("t3", jobs=2)
    assert [r.iterations for r in serial.rows] == [r.iterations for r in parallel.rows]


def test_csv_round_trip_identical_bytes(t4):
    buf = io.StringIO(newline="")
    write_csv_rows(buf, [r.record() for r in t4.rows])
    first = buf.getvalue()
    rows = read_csv_rows(io.StringIO(first, newline=""))
    assert len(rows) == len(t4.rows)
    again = io.StringIO(newline="")
    write_csv_rows(again, rows)
    assert again.getvalue() == first


def test_emit_empty_refuses(tmp_path):
    with pytest.raises(ValueError):
        emit_report(BenchTable("t4"), str(tmp_path / "x.csv"))


def test_emit_json_carries_config(t4, tmp_path):
    path = emit_report(t4, str(tmp_path / "t4.json"))
    doc = json.loads(open(path).read())
    assert doc["columns"] == list(COLUMNS)
    assert len(doc["rows"]) == 8
    cfg = doc["rows"][0]["config"]
    for key in ("block_size", "overlap", "tol", "max_sweeps", "window", "cond_threshold",
                "kernel", "seed", "repeat"):
        assert key in cfg


def test_emit_csv_header(t4, tmp_path):
    path = emit_report(t4, str(tmp_path / "t4.csv"))
    with open(path, newline="") as fh:
        assert fh.readline().rstrip("\r\n").split(",") == list(COLUMNS)


def test_t1_monotone_in_tolerance():
    t1 = run_table("t1")
    counts = [t1.iterations("sap")[t] for t in TOLERANCES]
    assert counts == sorted(counts)
    assert all(r.converged for r in t1.rows)
