import copy

import pytest

from svgreuse.corpus import standard_corpus
from svgreuse.decompose import heuristic_decompose
from svgreuse.errors import IrParseError
from svgreuse.ir import ColumnKind, Dataset, parse_ir, serialize_ir, validate_ir


@pytest.fixture(scope="module")
def bar_ir():
    chart = standard_corpus()[0]
    marked, dataset, ir = heuristic_decompose(chart.document)
    return marked, dataset, ir


def test_serialize_parse_round_trip_bytes(bar_ir):
    _, _, ir = bar_ir
    text = serialize_ir(ir)
    assert serialize_ir(parse_ir(text)) == text


def test_canonical_form_is_stable(bar_ir):
    _, _, ir = bar_ir
    assert serialize_ir(ir) == serialize_ir(ir)
    assert serialize_ir(ir).endswith("\n")


def test_round_trip_for_all_prototypes():
    for chart in standard_corpus():
        _, _, ir = heuristic_decompose(chart.document)
        assert serialize_ir(parse_ir(serialize_ir(ir))) == serialize_ir(ir)


def test_parse_rejects_bad_json():
    with pytest.raises(IrParseError):
        parse_ir("not json")


def test_parse_rejects_missing_keys():
    with pytest.raises(IrParseError):
        parse_ir("{}")


def test_parse_rejects_bad_enum(bar_ir):
    _, _, ir = bar_ir
    text = serialize_ir(ir).replace('"Bar"', '"Blob"')
    with pytest.raises(IrParseError):
        parse_ir(text)


def test_validate_ok(bar_ir):
    marked, _, ir = bar_ir
    report = validate_ir(ir, marked)
    assert report.ok, str(report)


def test_validate_flags_dangling_and_orphan_ids(bar_ir):
    marked, _, ir = bar_ir
    broken = copy.deepcopy(ir)
    moved = broken.marks[0].member_ids.pop()
    broken.marks[0].member_ids.append(9999)
    report = validate_ir(broken, marked)
    kinds = {i.kind for i in report.issues}
    assert "dangling-id" in kinds  # 9999 is not in the document
    assert "orphan-id" in kinds  # the removed id is now unpartitioned
    assert any(str(moved) in i.detail for i in report.issues)


def test_validate_flags_duplicate_partition(bar_ir):
    marked, _, ir = bar_ir
    broken = copy.deepcopy(ir)
    broken.text_layer_ids = list(broken.text_layer_ids) + [broken.marks[0].member_ids[0]]
    report = validate_ir(broken, marked)
    assert any(i.kind == "duplicate-id" for i in report.issues)


def test_validate_flags_unknown_data_field(bar_ir):
    marked, _, ir = bar_ir
    broken = copy.deepcopy(ir)
    broken.marks[0].encoded_attributes = [
        (a, "no_such_column", s) for a, _, s in broken.marks[0].encoded_attributes
    ]
    report = validate_ir(broken, marked)
    assert any(i.kind == "schema-mismatch" for i in report.issues)


def test_validate_flags_scale_gap(bar_ir):
    marked, _, ir = bar_ir
    report = validate_ir(ir, marked, known_scale_ids=set())
    assert any(i.kind == "scale-gap" for i in report.issues)


def test_dataset_checks_ragged_rows():
    data = Dataset([("k", ColumnKind.STRING)], [("a", "extra")])
    with pytest.raises(IrParseError):
        data.check()


def test_dataset_checks_number_cells():
    data = Dataset([("v", ColumnKind.NUMBER)], [("oops",)])
    with pytest.raises(IrParseError):
        data.check()


def test_dataset_column_access():
    data = Dataset(
        [("k", ColumnKind.STRING), ("v", ColumnKind.NUMBER)],
        [("a", 1.0), ("b", 2.0)],
    )
    assert data.column_values("v") == [1.0, 2.0]
    assert data.column_names() == ["k", "v"]
