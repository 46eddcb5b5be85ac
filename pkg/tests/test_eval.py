import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from svgreuse.corpus import standard_corpus
from svgreuse.decompose import heuristic_decompose
from svgreuse.errors import EvalError
from svgreuse.ir import ColumnKind, Dataset
from svgreuse.svg.model import assign_ids, parse, serialize
from svgreuse.svg.markers import GroupMarker, insert_markers, strip_markers
from svgreuse.layers import LayerRole
from svgreuse.template.ast import ScaleDef, ScaleKind, lit
from svgreuse.template.eval import BuiltScale, evaluate, to_attr_text
from svgreuse.template.parser import parse_program
from svgreuse.template.synthesize import synthesize_heuristic

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def linear(d0, d1, r0, r1):
    spec = ScaleDef("s", ScaleKind.LINEAR, [lit(d0), lit(d1)], [lit(r0), lit(r1)])
    return BuiltScale(spec, [d0, d1], [r0, r1])


def band(domain, r0, r1, padding=0.0):
    spec = ScaleDef("s", ScaleKind.BAND, [], [lit(r0), lit(r1)], band_padding=padding)
    return BuiltScale(spec, list(domain), [r0, r1])


# -- scale laws --------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite)
def test_linear_maps_endpoints_and_midpoint(d0, d1, r0, r1):
    assume(d1 - d0 > 1e-6)
    s = linear(d0, d1, r0, r1)
    assert s.apply(d0) == pytest.approx(r0, abs=1e-6 * max(1, abs(r0)))
    assert s.apply(d1) == pytest.approx(r1, abs=1e-6 * max(1, abs(r1)))
    mid = (r0 + r1) / 2
    assert s.apply((d0 + d1) / 2) == pytest.approx(mid, abs=1e-6 * max(1, abs(mid)))


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite, st.floats(0, 1))
def test_linear_is_affine(d0, d1, r0, r1, t):
    assume(d1 - d0 > 1e-6)
    s = linear(d0, d1, r0, r1)
    v = d0 + t * (d1 - d0)
    expected = r0 + (v - d0) / (d1 - d0) * (r1 - r0)
    assert s.apply(v) == pytest.approx(expected, abs=1e-6 * max(1, abs(expected)))


def test_linear_rejects_out_of_domain():
    with pytest.raises(EvalError):
        linear(0, 10, 0, 100).apply(11)
    with pytest.raises(EvalError):
        linear(0, 10, 0, 100).apply(-1)


def test_linear_allows_tiny_float_slack():
    assert linear(0, 10, 0, 100).apply(10 + 1e-12) == pytest.approx(100)


@settings(max_examples=100, deadline=None)
@given(
    st.integers(1, 12),
    st.floats(-1000, 1000),
    st.floats(1, 2000),
    st.floats(0, 0.9),
)
def test_band_closed_forms(n, r0, span, padding):
    r1 = r0 + span
    domain = [f"c{i}" for i in range(n)]
    s = band(domain, r0, r1, padding)
    step = span / n
    for i, key in enumerate(domain):
        expected = r0 + i * step + step * padding / 2
        assert s.apply(key) == pytest.approx(expected, abs=1e-9 * max(1, span))
    assert s.bandwidth() == pytest.approx(step * (1 - padding), abs=1e-9 * max(1, span))


def test_band_reference_example():
    s = band(["a", "b", "c", "d"], 0, 400, 0.0)
    assert [s.apply(k) for k in "abcd"] == [0, 100, 200, 300]
    assert s.bandwidth() == 100


def test_point_scale_endpoints():
    spec = ScaleDef("s", ScaleKind.POINT, [], [lit(0), lit(90)])
    s = BuiltScale(spec, ["a", "b", "c", "d"], [0, 90])
    assert [s.apply(k) for k in "abcd"] == [0, 30, 60, 90]


def test_ordinal_color_cycles():
    spec = ScaleDef("s", ScaleKind.ORDINAL_COLOR, [], [lit("#a"), lit("#b")])
    s = BuiltScale(spec, ["u", "v", "w"], ["#a", "#b"])
    assert [s.apply(k) for k in "uvw"] == ["#a", "#b", "#a"]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.integers(1, 5))
def test_ordinal_color_cycle_property(n_values, n_colors):
    colors = [f"#c{i}" for i in range(n_colors)]
    domain = [f"v{i}" for i in range(n_values)]
    spec = ScaleDef("s", ScaleKind.ORDINAL_COLOR, [], [lit(c) for c in colors])
    s = BuiltScale(spec, domain, colors)
    for i, key in enumerate(domain):
        assert s.apply(key) == colors[i % n_colors]


def test_unknown_category_rejected():
    with pytest.raises(EvalError):
        band(["a"], 0, 10).apply("z")


# -- attribute formatting ----------------------------------------------------


def test_to_attr_text_limits_places():
    assert to_attr_text(1.00004) == "1"
    assert to_attr_text(123.456789) == "123.4568"
    assert to_attr_text("hello") == "hello"
    assert to_attr_text(50.0) == "50"


# -- full evaluation ---------------------------------------------------------


@pytest.fixture(scope="module")
def bar_setup():
    chart = standard_corpus()[0]
    marked, dataset, ir = heuristic_decompose(chart.document)
    program = synthesize_heuristic(marked, ir)
    return program, marked, dataset


def test_evaluate_is_deterministic(bar_setup):
    program, marked, dataset = bar_setup
    first = serialize(evaluate(program, marked, dataset, None))
    for _ in range(50):
        assert serialize(evaluate(program, marked, dataset, None)) == first


def test_evaluate_output_has_no_markers(bar_setup):
    program, marked, dataset = bar_setup
    out = evaluate(program, marked, dataset, None)
    assert "dw:group" not in serialize(out)


def test_evaluate_respects_params(bar_setup):
    program, marked, dataset = bar_setup
    tall = serialize(evaluate(program, marked, dataset, {"chart_height": 110.0}))
    base = serialize(evaluate(program, marked, dataset, None))
    assert tall != base


def test_evaluate_new_data_changes_marks(bar_setup):
    program, marked, _ = bar_setup
    data = Dataset(
        [("category", ColumnKind.STRING), ("value", ColumnKind.NUMBER)],
        [("A", 5.0), ("B", 45.0)],
    )
    out = evaluate(program, marked, data, None)
    rects = [
        n for n in out.iter_elements() if n.tag == "rect" and n.get("fill") == "#4682b4"
    ]
    assert len(rects) == 2


def test_evaluate_rejects_missing_schema_column(bar_setup):
    program, marked, _ = bar_setup
    data = Dataset([("category", ColumnKind.STRING)], [("A",)])
    with pytest.raises(EvalError):
        evaluate(program, marked, data, None)


def test_empty_program_reproduces_reference():
    doc = assign_ids(parse(b'<svg width="10" height="10"><rect x="1"/></svg>'))
    marked = insert_markers(doc, [GroupMarker(LayerRole.DECORATIVE, "all", [2])])
    program = parse_program("")
    data = Dataset([], [])
    out = evaluate(program, marked, data, None)
    assert serialize(out) == serialize(strip_markers(marked))


def test_set_directive_overrides_attribute():
    doc = assign_ids(parse(b'<svg width="10" height="10"><rect x="1" fill="red"/></svg>'))
    marked = insert_markers(doc, [GroupMarker(LayerRole.DECORATIVE, "all", [2])])
    program = parse_program('set 2 fill "#00ff00"\n')
    out = evaluate(program, marked, Dataset([], []), None)
    rect = out.root.children[0]
    assert rect.get("fill") == "#00ff00"
    assert rect.get("x") == "1"


def test_clone_directive_duplicates_element():
    doc = assign_ids(parse(b'<svg width="10" height="10"><rect x="1"/></svg>'))
    marked = insert_markers(doc, [GroupMarker(LayerRole.DECORATIVE, "all", [2])])
    program = parse_program("clone 2\n  x 5\nend\n")
    out = evaluate(program, marked, Dataset([], []), None)
    xs = [n.get("x") for n in out.iter_elements() if n.tag == "rect"]
    assert xs == ["1", "5"]
