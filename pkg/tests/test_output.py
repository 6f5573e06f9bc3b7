import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from biphoton.analysis import Pattern, Provenance
from biphoton.grid import Grid1D
from biphoton.output import CSV_HEADER, atomic_write, pattern_csv, pattern_svg, rows_csv, to_json

AXIS = Grid1D.centered(10.0, 16)


def _pat(values, prov=Provenance.ANALYTIC, label="p"):
    return Pattern.from_values(AXIS, values, prov, label)


def test_pattern_csv_schema():
    a = _pat(1 + np.cos(AXIS.x))
    n = _pat(np.ones(AXIS.n), Provenance.NUMERIC)
    lines = pattern_csv(a, n).splitlines()
    assert lines[0] == "x,density_analytic,density_numeric" == ",".join(CSV_HEADER)
    assert len(lines) == AXIS.n + 1
    num = r"-?\d\.\d{12}e[+-]\d{2}"
    assert all(re.fullmatch(f"{num},{num},{num}", line) for line in lines[1:])
    assert float(lines[1].split(",")[0]) == AXIS.x[0]


def test_pattern_csv_needs_shared_axis():
    other = Pattern.from_values(Grid1D.centered(10.0, 8), np.ones(8), Provenance.NUMERIC)
    with pytest.raises(ValueError):
        pattern_csv(_pat(np.ones(AXIS.n)), other)


def test_rows_csv_unions_columns():
    text = rows_csv([{"a": 1.0, "b": None}, {"a": 2.0, "c": "x"}])
    assert text.splitlines() == ["a,b,c", "1.000000000000e+00,,", "2.000000000000e+00,,x"]


def test_to_json_handles_numpy():
    assert to_json({"v": np.float64(1.5), "a": np.arange(2)}) == '{\n  "v": 1.5,\n  "a": [\n    0,\n    1\n  ]\n}\n'


def test_svg_is_valid_and_styled():
    a = _pat(1 + np.cos(AXIS.x), label="law <a&b>")
    n = _pat(1 + np.cos(AXIS.x + 0.1), Provenance.NUMERIC, "oracle")
    root = ET.fromstring(pattern_svg([(a, "solid"), (n, "dotted")], title="T & U"))
    ns = "{http://www.w3.org/2000/svg}"
    lines = root.findall(f"{ns}polyline")
    assert len(lines) == 2
    assert "stroke-dasharray" not in lines[0].attrib
    assert "stroke-dasharray" in lines[1].attrib
    assert len(lines[0].attrib["points"].split()) == AXIS.n
    texts = [t.text for t in root.iter(f"{ns}text")]
    assert "T & U" in texts and "Analytic: law <a&b>" in texts


def test_atomic_write_replaces_and_cleans_up(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    atomic_write(target, "one")
    atomic_write(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in target.parent.iterdir()] == ["f.txt"]
