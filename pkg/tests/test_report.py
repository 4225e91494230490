import csv
import io
import json

import jsonschema
import pytest

from queriability.fitness import WeightedSum
from queriability.harness import run_matrix
from queriability.report import CSV_HEADER, REPORT_SCHEMA, render_report, report_to_json


@pytest.fixture(scope="module")
def report(bundle):
    return run_matrix(bundle)


def test_csv_layout(report):
    rows = list(csv.reader(io.StringIO(render_report(report, "csv"))))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 26
    m45 = next(r for r in rows if r[:2] == ["r4", "MA5"])
    assert m45[3:7] == ["6", "2", "2", "exact"]
    m11 = next(r for r in rows if r[:2] == ["r1", "MA1"])
    assert m11[6:] == ["partial", "3/4", "1"]


def test_markdown_marks_partial_cells(report):
    md = render_report(report, "md")
    assert md.count("(partial)") == 12
    assert "`(and Image (some shows Neoplasm))` (3,2,1)" in md
    assert "(7,2,2)" in md  # the fitness footnote


def test_json_matches_schema(report):
    data = json.loads(render_report(report, "json"))
    jsonschema.validate(data, REPORT_SCHEMA)
    assert data == report_to_json(report)
    assert len(data["cells"]) == 25
    assert data["mode"] == "transcribed" and data["order"] == "lex"


def test_json_schema_rejects_bad_status(report):
    data = report_to_json(report)
    data["cells"][0]["status"] = "grey"
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(data, REPORT_SCHEMA)


@pytest.mark.parametrize("fmt", ["md", "csv", "json"])
def test_reports_are_byte_identical(bundle, fmt):
    a = render_report(run_matrix(bundle), fmt)
    b = render_report(run_matrix(bundle), fmt)
    assert a == b


def test_order_is_recorded(bundle):
    rep = run_matrix(bundle, order=WeightedSum((1, 2, 3)))
    assert report_to_json(rep)["order"] == "sum:1,2,3"


def test_unknown_format(report):
    with pytest.raises(ValueError):
        render_report(report, "xml")
