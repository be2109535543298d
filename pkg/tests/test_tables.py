"""Table generation mechanics; the cell-by-cell expectations live in the acceptance suite."""

import pytest

from svmart import tables
from svmart.quad import FINITE, INCONCLUSIVE, INFINITE
from svmart.scale import Measure


def test_cell_notation():
    assert tables.cell("s_left", INFINITE) == "-inf"
    assert tables.cell("s_left", FINITE) == ">-inf"
    assert tables.cell("v_right", INFINITE) == "inf"
    assert tables.cell("vb_left", FINITE) == "<inf"
    assert tables.cell("s_right", INCONCLUSIVE) == "?"


@pytest.mark.parametrize("spec", tables.TABLES, ids=lambda s: s.name)
def test_every_row_is_determined_by_its_regime(spec):
    rows = tables.render(spec)
    assert [lbl for lbl, _ in rows] == [r.label for r in spec.rows]
    assert all(len(cells) == len(spec.columns) for _, cells in rows)
    assert all(len(r.points) >= 1 for r in spec.rows)


def test_ambiguous_row_is_reported():
    spec = tables.TableSpec("mixed", "heston", Measure.TILDE, ("s_left",),
                            (tables.Row("both", (tables._heston(1.0, 1.0), tables._heston(4.0, 1.0))),))
    with pytest.raises(tables.TableError, match="not determined"):
        tables.render(spec)


def test_select_filters():
    assert {t.family for t in tables.select("heston")} == {"heston"}
    assert all(t.measure is Measure.ORIGINAL for t in tables.select(measure=Measure.ORIGINAL))
    assert len(tables.select()) == len(tables.TABLES)


def test_text_layout_is_aligned():
    text = tables.format_text(tables.select("heston", Measure.ORIGINAL)[0])
    header, rule = text.splitlines()[1:3]
    assert header.startswith("case") and set(rule) <= {"-", " "}
    starts = [i for i, ch in enumerate(rule) if ch == "-" and (i == 0 or rule[i - 1] == " ")]
    for line in text.splitlines()[3:]:
        assert all(i == 0 or line[i - 1] == " " for i in starts)


def test_structured_rows():
    spec = tables.select("three_halves", Measure.TILDE)[0]
    lines = tables.format_structured(spec)
    assert lines[0] == "table.three_halves-tilde.measure=tilde"
    assert "table.three_halves-tilde.row_count=2" in lines
    i = lines.index("table.three_halves-tilde.row.0.label=a_tilde<-1")
    assert lines[i + 1] == "table.three_halves-tilde.row.0.cells=-inf,<inf,inf,<inf,inf,inf"
    assert all(line.split("=", 1)[0].count("=") == 0 for line in lines)


@pytest.mark.parametrize("family", tables.FAMILIES)
def test_summary_grids_are_definite(family):
    rows = tables.summary_rows(family)
    assert len(rows) >= 6
    assert all(t.definite for _, v in rows for t in v.values())
    structured = tables.format_summary_structured(family)
    assert len(structured) == 5 * len(rows)
