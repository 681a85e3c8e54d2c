import csv

import pytest

from dirachop.errors import MissingDataError
from dirachop.experiments import ComparisonReport, TIMING_NOTE, error_metric, timing_report, write_timing


def test_error_metric_examples():
    assert error_metric({"p_dir_plus": 9.06998e-2, "p_sh_plus": 9.06980e-2}) == pytest.approx(1.8e-6, rel=1e-6)
    assert error_metric({"p_dir_plus": 7.48058e-2, "p_sh_plus": 9.07411e-2}) == pytest.approx(1.59353e-2, rel=1e-9)
    assert error_metric({"p_dir_plus": 0.3, "p_sh_plus": 0.3}) == 0.0


@pytest.mark.parametrize("row", [{"p_dir_plus": 0.1}, {"p_sh_plus": 0.1}, {"p_dir_plus": None, "p_sh_plus": 0.1}])
def test_error_metric_missing_data(row):
    with pytest.raises(MissingDataError):
        error_metric(row)


def test_timing_report_and_csv(tmp_path):
    rep = ComparisonReport("t", [{"h": 1e-2, "cpu_dir": 5.0, "cpu_sh": 0.01}, {"h": 1e-4, "cpu_dir": 90.0, "cpu_sh": 0.02}])
    rows = timing_report(rep)
    assert [r["ratio"] for r in rows] == pytest.approx([500.0, 4500.0])
    write_timing(rows, tmp_path / "timing.csv")
    with open(tmp_path / "timing.csv") as fh:
        got = list(csv.DictReader(fh))
    assert list(got[0]) == ["h", "cpu_dir", "cpu_sh", "ratio", "note"]
    assert float(got[1]["ratio"]) == pytest.approx(4500.0)
    assert got[0]["note"] == TIMING_NOTE
    with pytest.raises(MissingDataError):
        timing_report(ComparisonReport("t", [{"h": 1.0}]))


def test_report_csv_layout(tmp_path):
    rep = ComparisonReport("x", [{"a": 1, "b": 2.5}, {"a": 3, "c": "z"}], {"physics.h": "1e-3"}, ["hello"])
    rep.write(tmp_path)
    with open(tmp_path / "report.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["a", "b", "c"]
    assert rows[2][1] == "" and rows[2][2] == "z"
    assert float(rows[1][1]) == 2.5
    with open(tmp_path / "params.csv") as fh:
        params = list(csv.reader(fh))
    assert params[0] == ["key", "value"]
    assert ["physics.h", "1e-3"] in params and ["note", "hello"] in params
